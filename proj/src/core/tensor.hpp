#ifndef CELF_CORE_TENSOR_HPP
#define CELF_CORE_TENSOR_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace celf {

// Dense row-major tensor of doubles, 1 to 4 axes, with an optional gradient
// buffer of the same shape.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    static Tensor from_values(std::vector<int> shape, std::vector<double> values);

    const std::vector<int>& shape() const { return shape_; }
    int dim(int axis) const;
    size_t numel() const { return values_.size(); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double at(int i) const;
    double at(int i, int j) const;
    double at(int i, int j, int k) const;
    double at(int i, int j, int k, int l) const;
    void set(int i, int j, int k, double v);

    bool has_grad() const { return !grad_.empty(); }
    void ensure_grad();
    void zero_grad();
    std::vector<double>& grad();
    const std::vector<double>& grad() const;

private:
    size_t offset(const int* idx, int n) const;

    std::vector<int> shape_;
    std::vector<double> values_;
    std::vector<double> grad_;
};

// c += a * b for row-major a (m x k), b (k x n), c (m x n).
void gemm_acc(int m, int k, int n, const double* a, const double* b, double* c);

// c += a * b^T for row-major a (m x k), b (n x k), c (m x n).
void gemm_abt_acc(int m, int k, int n, const double* a, const double* b, double* c);

// Mean squared error over all elements plus its gradient wrt pred.
std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& target);

}  // namespace celf

#endif
