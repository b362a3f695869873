#ifndef CELF_CORE_RECNET_HPP
#define CELF_CORE_RECNET_HPP

#include <cstdint>
#include <vector>

#include "core/tensor.hpp"

namespace celf {

// Same-padded 3x3 cross-correlation plus bias; x is (Cin,H,W), weight is
// (Cout,Cin,3,3), bias is (Cout); output is (Cout,H,W).
Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct ConvLayer {
    int cin = 0;
    int cout = 0;
    Tensor weight;  // (cout, cin, 3, 3)
    Tensor bias;    // (cout)
};

// Activations recorded by a forward pass, consumed by backward.
struct NetTrace {
    Tensor input;
    std::vector<Tensor> pre;   // conv output before the nonlinearity
    std::vector<Tensor> post;  // after ReLU, or sigmoid on the last layer
    bool valid = false;
};

// Stack of 3x3 convs with ReLU between layers and a sigmoid after the last.
class ReconNet {
public:
    ReconNet(int in_channels, std::vector<int> widths, uint64_t seed = 0);

    static std::vector<int> default_widths() { return {32, 32, 32, 32, 32, 32, 64, 64}; }

    int in_channels() const { return in_channels_; }
    int out_channels() const { return layers_.back().cout; }
    int layer_count() const { return static_cast<int>(layers_.size()); }
    const std::vector<ConvLayer>& layers() const { return layers_; }
    std::vector<ConvLayer>& layers() { return layers_; }

    // Flat parameter order: per layer, weights then bias.
    size_t param_count() const;
    void export_params(double* out) const;
    void import_params(const double* in);

    Tensor forward(const Tensor& x) const;
    Tensor forward(const Tensor& x, NetTrace& trace) const;

    // Accumulates into param_grads (length param_count) and returns the
    // gradient with respect to the input.
    Tensor backward(const NetTrace& trace, const Tensor& grad_out, double* param_grads) const;

private:
    int in_channels_ = 0;
    std::vector<ConvLayer> layers_;
};

}  // namespace celf

#endif
