/* Bit-test routing step in the style of a radix-trie lookup: two data-driven
 * branches over masked key bits. */
int top(int key, int mask, int bit, int out[2]) {
    int r;
    int t;
    r = 0;
    t = key & mask;
    if ((t & bit) == bit) {
        r = key | mask;
    } else {
        r = key ^ mask;
    }
    t = (t >> 2) ^ key;
    if (t < mask) {
        r = r + bit;
    }
    out[0] = r;
    out[1] = t * 3;
    return r - t;
}
