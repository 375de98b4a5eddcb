__device__ float square(float v) { return v * v; }
__global__ void sq(float *x, int n) {
    int i = blockIdx.x * blockDim.x + threadIdx.x;
    if (i < n) x[i] = square(x[i]);
}
