/* One branchless bubble sweep: each element is compare-exchanged with its
 * predecessor using arithmetic min/max, then a mixing checksum is returned. */
int top(unsigned char n, const int x[8], int a[8]) {
    int i;
    int s;
    int d;
    int t;
    i = 0;
    a[i] = x[i];
    i = 1;
    while (i < n) {
        a[i] = x[i];
        s = a[i - 1] - a[i];
        d = s & (s >> 31);
        t = a[i] + d;
        a[i] = a[i - 1] - d;
        a[i - 1] = t;
        i = i + 1;
    }
    return ((t ^ s) + (d * n)) - i;
}
