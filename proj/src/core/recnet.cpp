#include "core/recnet.hpp"

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace celf {

namespace {

void check_conv_shapes(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (x.shape().size() != 3) fail_dims("conv2d: input must be (C,H,W)");
    if (weight.shape().size() != 4) fail_dims("conv2d: weight must be (Cout,Cin,3,3)");
    if (weight.dim(2) != 3 || weight.dim(3) != 3) fail_dims("conv2d: kernel must be 3x3");
    if (weight.dim(1) != x.dim(0)) fail_dims("conv2d: input channels do not match weight");
    if (bias.shape().size() != 1 || bias.dim(0) != weight.dim(0))
        fail_dims("conv2d: bias length must equal output channels");
}

// cols is (Cin*9) x (H*W); entry ((c*3+ky)*3+kx, y*W+x) holds the padded
// input sample at (c, y+ky-1, x+kx-1).
void im2col(const double* x, int cin, int h, int w, double* cols) {
    size_t p = static_cast<size_t>(h) * w;
    for (int c = 0; c < cin; ++c) {
        const double* plane = x + static_cast<size_t>(c) * p;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                double* row = cols + (static_cast<size_t>(c) * 9 + ky * 3 + kx) * p;
                for (int y = 0; y < h; ++y) {
                    int sy = y + ky - 1;
                    double* out = row + static_cast<size_t>(y) * w;
                    if (sy < 0 || sy >= h) {
                        for (int xx = 0; xx < w; ++xx) out[xx] = 0.0;
                        continue;
                    }
                    const double* src = plane + static_cast<size_t>(sy) * w;
                    for (int xx = 0; xx < w; ++xx) {
                        int sx = xx + kx - 1;
                        out[xx] = (sx < 0 || sx >= w) ? 0.0 : src[sx];
                    }
                }
            }
        }
    }
}

void col2im_acc(const double* cols, int cin, int h, int w, double* dx) {
    size_t p = static_cast<size_t>(h) * w;
    for (int c = 0; c < cin; ++c) {
        double* plane = dx + static_cast<size_t>(c) * p;
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const double* row = cols + (static_cast<size_t>(c) * 9 + ky * 3 + kx) * p;
                for (int y = 0; y < h; ++y) {
                    int sy = y + ky - 1;
                    if (sy < 0 || sy >= h) continue;
                    const double* src = row + static_cast<size_t>(y) * w;
                    double* dst = plane + static_cast<size_t>(sy) * w;
                    for (int xx = 0; xx < w; ++xx) {
                        int sx = xx + kx - 1;
                        if (sx >= 0 && sx < w) dst[sx] += src[xx];
                    }
                }
            }
        }
    }
}

Tensor conv_with_cols(const Tensor& x, const Tensor& weight, const Tensor& bias,
                      std::vector<double>& cols) {
    int cin = x.dim(0);
    int h = x.dim(1);
    int w = x.dim(2);
    int cout = weight.dim(0);
    size_t p = static_cast<size_t>(h) * w;
    size_t k = static_cast<size_t>(cin) * 9;
    cols.resize(k * p);
    im2col(x.data(), cin, h, w, cols.data());

    Tensor out({cout, h, w});
    for (int o = 0; o < cout; ++o) {
        double b = bias.at(o);
        double* dst = out.data() + static_cast<size_t>(o) * p;
        for (size_t i = 0; i < p; ++i) dst[i] = b;
    }
    gemm_acc(cout, static_cast<int>(k), static_cast<int>(p), weight.data(), cols.data(), out.data());
    return out;
}

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    check_conv_shapes(x, weight, bias);
    std::vector<double> cols;
    return conv_with_cols(x, weight, bias, cols);
}

ReconNet::ReconNet(int in_channels, std::vector<int> widths, uint64_t seed)
    : in_channels_(in_channels) {
    if (in_channels <= 0) fail_invalid("network input channels must be positive");
    if (widths.empty()) fail_invalid("network needs at least one conv layer");
    int cin = in_channels;
    layers_.reserve(widths.size());
    for (size_t li = 0; li < widths.size(); ++li) {
        int cout = widths[li];
        if (cout <= 0) fail_invalid("layer width must be positive");
        ConvLayer layer;
        layer.cin = cin;
        layer.cout = cout;
        layer.weight = Tensor({cout, cin, 3, 3});
        layer.bias = Tensor({cout});
        double limit = std::sqrt(6.0 / (static_cast<double>(cin) * 9.0));
        double* wdata = layer.weight.data();
        for (size_t i = 0; i < layer.weight.numel(); ++i) {
            double u = rng::uniform01(rng::key(seed, li, i));
            wdata[i] = (2.0 * u - 1.0) * limit;
        }
        layers_.push_back(std::move(layer));
        cin = cout;
    }
}

size_t ReconNet::param_count() const {
    size_t n = 0;
    for (const ConvLayer& l : layers_) n += l.weight.numel() + l.bias.numel();
    return n;
}

void ReconNet::export_params(double* out) const {
    size_t off = 0;
    for (const ConvLayer& l : layers_) {
        for (double v : l.weight.values()) out[off++] = v;
        for (double v : l.bias.values()) out[off++] = v;
    }
}

void ReconNet::import_params(const double* in) {
    size_t off = 0;
    for (ConvLayer& l : layers_) {
        for (double& v : l.weight.values()) v = in[off++];
        for (double& v : l.bias.values()) v = in[off++];
    }
}

Tensor ReconNet::forward(const Tensor& x) const {
    NetTrace trace;
    return forward(x, trace);
}

Tensor ReconNet::forward(const Tensor& x, NetTrace& trace) const {
    if (x.shape().size() != 3) fail_dims("network input must be (C,H,W)");
    if (x.dim(0) != in_channels_) fail_dims("network input channel count mismatch");
    trace.input = x;
    trace.pre.clear();
    trace.post.clear();
    trace.pre.reserve(layers_.size());
    trace.post.reserve(layers_.size());

    std::vector<double> cols;
    const Tensor* cur = &trace.input;
    for (size_t li = 0; li < layers_.size(); ++li) {
        Tensor z = conv_with_cols(*cur, layers_[li].weight, layers_[li].bias, cols);
        Tensor a(z.shape());
        const double* zp = z.data();
        double* ap = a.data();
        size_t n = z.numel();
        if (li + 1 == layers_.size()) {
            for (size_t i = 0; i < n; ++i) ap[i] = 1.0 / (1.0 + std::exp(-zp[i]));
        } else {
            for (size_t i = 0; i < n; ++i) ap[i] = zp[i] > 0.0 ? zp[i] : 0.0;
        }
        trace.pre.push_back(std::move(z));
        trace.post.push_back(std::move(a));
        cur = &trace.post.back();
    }
    trace.valid = true;
    return trace.post.back();
}

Tensor ReconNet::backward(const NetTrace& trace, const Tensor& grad_out,
                          double* param_grads) const {
    if (!trace.valid || trace.post.size() != layers_.size())
        throw StateError("backward called without a matching forward pass");
    if (!grad_out.same_shape(trace.post.back())) fail_dims("upstream gradient shape mismatch");

    std::vector<size_t> offsets(layers_.size());
    size_t off = 0;
    for (size_t li = 0; li < layers_.size(); ++li) {
        offsets[li] = off;
        off += layers_[li].weight.numel() + layers_[li].bias.numel();
    }

    std::vector<double> cols, dcols, wt;
    Tensor dpost = grad_out;
    for (size_t li = layers_.size(); li-- > 0;) {
        const ConvLayer& layer = layers_[li];
        const Tensor& input = li == 0 ? trace.input : trace.post[li - 1];
        int h = input.dim(1);
        int w = input.dim(2);
        size_t p = static_cast<size_t>(h) * w;
        size_t k = static_cast<size_t>(layer.cin) * 9;

        // Nonlinearity backward into dz (reusing dpost storage).
        Tensor dz = std::move(dpost);
        double* dzp = dz.data();
        if (li + 1 == layers_.size()) {
            const double* y = trace.post[li].data();
            for (size_t i = 0; i < dz.numel(); ++i) dzp[i] *= y[i] * (1.0 - y[i]);
        } else {
            const double* z = trace.pre[li].data();
            for (size_t i = 0; i < dz.numel(); ++i) dzp[i] = z[i] > 0.0 ? dzp[i] : 0.0;
        }

        double* dw = param_grads + offsets[li];
        double* db = dw + layer.weight.numel();
        for (int o = 0; o < layer.cout; ++o) {
            const double* row = dzp + static_cast<size_t>(o) * p;
            double acc = 0.0;
            for (size_t i = 0; i < p; ++i) acc += row[i];
            db[o] += acc;
        }

        cols.resize(k * p);
        im2col(input.data(), layer.cin, h, w, cols.data());
        gemm_abt_acc(layer.cout, static_cast<int>(p), static_cast<int>(k), dzp, cols.data(), dw);

        wt.assign(k * static_cast<size_t>(layer.cout), 0.0);
        const double* wsrc = layer.weight.data();
        for (int o = 0; o < layer.cout; ++o) {
            for (size_t kk = 0; kk < k; ++kk) {
                wt[kk * static_cast<size_t>(layer.cout) + o] = wsrc[static_cast<size_t>(o) * k + kk];
            }
        }
        dcols.assign(k * p, 0.0);
        gemm_acc(static_cast<int>(k), layer.cout, static_cast<int>(p), wt.data(), dzp, dcols.data());

        Tensor dx({layer.cin, h, w});
        col2im_acc(dcols.data(), layer.cin, h, w, dx.data());
        dpost = std::move(dx);
    }
    return dpost;
}

}  // namespace celf
