int top(int a, int b, int c, int d) {
    int t;
    int u;
    t = (a + b) * (c - d);
    u = (t ^ a) & b;
    return u - (c | d);
}
