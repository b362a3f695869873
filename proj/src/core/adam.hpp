#ifndef CELF_CORE_ADAM_HPP
#define CELF_CORE_ADAM_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

namespace celf {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

// Bias-corrected Adam over a flat parameter vector.
class Adam {
public:
    Adam(size_t n, AdamConfig cfg = {});

    void step(double* params, const double* grads);

    size_t size() const { return m_.size(); }
    uint64_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    const std::vector<double>& m() const { return m_; }
    const std::vector<double>& v() const { return v_; }
    void reset();

private:
    AdamConfig cfg_;
    std::vector<double> m_;
    std::vector<double> v_;
    uint64_t t_ = 0;
};

}  // namespace celf

#endif
