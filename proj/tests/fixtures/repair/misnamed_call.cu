__global__ void count_hits(const int *flags, int *total, int n) {
    int i = blockIdx.x * blockDim.x + threadIdx.x;
    if (i < n && flags[i]) {
        atomicAddInt(total, 1);
    }
}
