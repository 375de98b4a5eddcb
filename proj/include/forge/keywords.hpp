#pragma once

#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "forge/language.hpp"
#include "forge/text.hpp"

namespace forge {

// Default reserved-keyword lists, in the same format as data/keywords/*.txt:
// one keyword per line, '#' starts a comment.

inline constexpr std::string_view cuda_keywords_text = R"(# CUDA-specific reserved words and builtins
__global__
__device__
__host__
__shared__
__constant__
__managed__
__restrict__
__launch_bounds__
__syncthreads
__syncwarp
__threadfence
__ldg
__shfl_sync
__shfl_down_sync
__shfl_up_sync
__shfl_xor_sync
__ballot_sync
__any_sync
__all_sync
__popc
__clz
__expf
__logf
__powf
__fdividef
__float2int_rn
__int2float_rn
threadIdx
blockIdx
blockDim
gridDim
warpSize
dim3
atomicAdd
atomicSub
atomicExch
atomicMin
atomicMax
atomicInc
atomicDec
atomicCAS
atomicAnd
atomicOr
atomicXor
cudaMalloc
cudaMallocManaged
cudaFree
cudaMemcpy
cudaMemcpyAsync
cudaMemset
cudaMemcpyHostToDevice
cudaMemcpyDeviceToHost
cudaMemcpyDeviceToDevice
cudaDeviceSynchronize
cudaGetLastError
cudaError_t
cudaSuccess
cudaStream_t
cudaStreamCreate
cudaEvent_t
cudaEventCreate
cudaEventRecord
)";

inline constexpr std::string_view cpp_keywords_text = R"(# C++ reserved words and common library names
alignas
alignof
auto
bool
break
case
catch
char
class
const
constexpr
const_cast
continue
decltype
default
delete
do
double
dynamic_cast
else
enum
explicit
extern
false
float
for
friend
goto
if
inline
int
long
mutable
namespace
new
noexcept
nullptr
operator
private
protected
public
register
reinterpret_cast
return
short
signed
sizeof
static
static_assert
static_cast
struct
switch
template
this
throw
true
try
typedef
typename
union
unsigned
using
virtual
void
volatile
while
size_t
std
vector
string
cout
cin
endl
printf
malloc
free
memcpy
memset
)";

inline constexpr std::string_view fortran_keywords_text = R"(# Fortran reserved words and intrinsics (matched case-insensitively)
program
end
subroutine
function
module
use
implicit
none
integer
real
double
precision
complex
logical
character
dimension
allocatable
intent
in
out
inout
parameter
do
enddo
if
then
else
elseif
endif
call
return
contains
allocate
deallocate
print
write
read
stop
exit
cycle
select
case
where
forall
pure
elemental
recursive
result
type
kind
len
save
pointer
target
optional
interface
private
public
sqrt
abs
sum
size
mod
max
min
exp
log
sin
cos
matmul
transpose
)";

inline std::set<std::string> parse_keyword_list(std::string_view text) {
    std::set<std::string> out;
    std::istringstream is{std::string(text)};
    std::string line;
    while (std::getline(is, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto t = trim(line);
        if (!t.empty()) out.emplace(t);
    }
    return out;
}

inline std::set<std::string> default_keywords(Language l) {
    switch (l) {
    case Language::cpp: return parse_keyword_list(cpp_keywords_text);
    case Language::cuda: return parse_keyword_list(cuda_keywords_text);
    case Language::fortran: return parse_keyword_list(fortran_keywords_text);
    }
    return {};
}

/// Keyword set used by the keyword-weighted n-gram match: CUDA code is
/// scored with both the C++ and the CUDA lists.
inline std::set<std::string> metric_keywords(Language l) {
    auto k = default_keywords(l);
    if (l == Language::cuda) k.merge(default_keywords(Language::cpp));
    return k;
}

} // namespace forge
