int top(int a, int b) {
    int r;
    if (a < b) {
        r = a;
    } else {
        r = b;
    }
    return r;
}
