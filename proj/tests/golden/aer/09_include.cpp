#include <vector>
std::vector<int> squares(int n) {
    std::vector<int> out;
    for (int i = 0; i < n; i++) out.push_back(i * i);
    return out;
}
