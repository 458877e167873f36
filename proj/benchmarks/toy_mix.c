int top(int a, int b, int c) {
    int t;
    t = a + b;
    if (t > c) {
        t = t - c;
    }
    return t ^ a;
}
