template <typename T>
__global__ void set_valid_mask_gpu(const T *score, T score_thr, int *valid_mask, int dims) {
    int tid = blockIdx.x * blockDim.x + threadIdx.x;
    if (tid < dims) {
        if (score[tid] > score_thr) {
            valid_mask[tid] = 1;
        } else {
            valid_mask[tid] = 0;
        }
    }
}
