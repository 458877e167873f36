int top(int a) {
    return a ^ 23205;
}
