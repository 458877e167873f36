/* The product feeding `dead` never reaches an output. */
int top(int a, int b) {
    int dead;
    dead = b * 17;
    return a + a;
}
