void swap(int *a, int *b) {
    int t = *a;
    *a = *b;
    *b = t;
}
void run() {
    int p = 1, q = 2;
    swap(&p, &q);
}
