int main() {
    float *d = nullptr;
    cudaMalloc(&d, 1024 * sizeof(float));
    cudaFree(d);
    return 0;
}
