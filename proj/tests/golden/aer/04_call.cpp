double mean(const double *v, int n);
double half(double *v) {
    return mean(v, 2) / 2.0;
}
