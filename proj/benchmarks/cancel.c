/* Add/subtract pair around the same operand: locking both operations lets a
 * wrong key select fakes that cancel exactly, so partial locking can score
 * higher than locking everything. */
int top(int a, int c, int m) {
    return ((a * m) + c) - c;
}
