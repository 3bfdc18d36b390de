#ifndef CLMB_MATRIX_HPP
#define CLMB_MATRIX_HPP

#include <cstddef>
#include <vector>

namespace clmb {

/* Dense row-major matrix. */
template <class T>
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> v;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, T(0)) {}

    T& operator()(std::size_t i, std::size_t j) { return v[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
    T* row(std::size_t i) { return v.data() + i * cols; }
    const T* row(std::size_t i) const { return v.data() + i * cols; }
    T* data() { return v.data(); }
    const T* data() const { return v.data(); }
    std::size_t size() const { return v.size(); }
    void zero() { for (auto& x : v) x = T(0); }
};

} // namespace clmb

#endif
