__global__ void k2(float *m, int w) {
    int x = blockIdx.x * blockDim.x + threadIdx.x;
    int y = blockIdx.y * blockDim.y + threadIdx.y;
    m[y * w + x] = 0.5f;
}
