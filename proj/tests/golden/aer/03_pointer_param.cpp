void scale(float *x, float k, int n) {
    for (int i = 0; i < n; ++i) {
        x[i] = x[i] * k;
    }
}
