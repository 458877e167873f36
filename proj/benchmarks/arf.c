/* Four-output multiply-accumulate filter core. Coefficients arrive as
 * inputs, so the dataflow is 28 arithmetic operations and no constants. */
int top(const int x[8], const int c[16], int out[4]) {
    out[0] = x[0] * c[0] + x[1] * c[1] + x[2] * c[2] + x[3] * c[3];
    out[1] = x[2] * c[4] + x[3] * c[5] + x[4] * c[6] + x[5] * c[7];
    out[2] = x[4] * c[8] + x[5] * c[9] + x[6] * c[10] + x[7] * c[11];
    out[3] = x[6] * c[12] + x[7] * c[13] + x[0] * c[14] + x[1] * c[15];
    return out[0];
}
