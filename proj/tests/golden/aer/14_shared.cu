__global__ void reduce(float *in, float *out) {
    __shared__ float buf[256];
    int t = threadIdx.x;
    buf[t] = in[blockIdx.x * 256 + t];
    __syncthreads();
    if (t == 0) out[blockIdx.x] = buf[0];
}
