__global__ void get_ev(double *old_arr, double *new_arr) {
    int tid = blockIdx.x * blockDim.x + threadIdx.x;
    if (tid < size) {
        new_arr[tid] = old_arr[tid];
    }
}
