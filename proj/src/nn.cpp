#include "edgeq/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "edgeq/rng.hpp"

namespace edgeq {

namespace {

double activate(Activation act, double z) {
    return act == Activation::Relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

// Derivative expressed through the activated value where possible.
double activate_grad(Activation act, double z, double a) {
    return act == Activation::Relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

}  // namespace

std::string_view activation_name(Activation act) {
    return act == Activation::Relu ? "relu" : "tanh";
}

Activation activation_from_name(std::string_view name) {
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu or tanh)");
}

MlpNetwork::MlpNetwork(std::vector<int> layer_sizes, Activation activation)
    : sizes_(std::move(layer_sizes)), activation_(activation) {
    if (sizes_.size() < 2) {
        throw DimensionMismatchError("network needs at least an input and an output layer");
    }
    for (int s : sizes_) {
        if (s < 1) throw DimensionMismatchError("layer sizes must be positive");
    }
    weights_.resize(sizes_.size() - 1);
    biases_.resize(sizes_.size() - 1);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        weights_[l].assign(static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l]), 0.0);
        biases_[l].assign(static_cast<std::size_t>(sizes_[l + 1]), 0.0);
    }
}

MlpNetwork MlpNetwork::glorot_init(std::vector<int> layer_sizes, Activation activation,
                                   std::uint64_t seed) {
    MlpNetwork net(std::move(layer_sizes), activation);
    Rng rng(seed);
    for (int l = 0; l < net.layer_count(); ++l) {
        const double fan_in = net.sizes_[static_cast<std::size_t>(l)];
        const double fan_out = net.sizes_[static_cast<std::size_t>(l) + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : net.weights_[static_cast<std::size_t>(l)]) {
            w = rng.uniform(-bound, bound);
        }
    }
    return net;
}

bool MlpNetwork::parameters_equal(const MlpNetwork& other) const {
    return sizes_ == other.sizes_ && weights_ == other.weights_ && biases_ == other.biases_;
}

std::vector<double> MlpNetwork::forward(const std::vector<double>& input) const {
    if (static_cast<int>(input.size()) != input_size()) {
        throw DimensionMismatchError("input length " + std::to_string(input.size()) +
                                     ", network expects " + std::to_string(input_size()));
    }
    std::vector<double> cur = input;
    std::vector<double> next;
    for (int l = 0; l < layer_count(); ++l) {
        const int out_n = sizes_[static_cast<std::size_t>(l) + 1];
        const int in_n = sizes_[static_cast<std::size_t>(l)];
        const double* w = weights_[static_cast<std::size_t>(l)].data();
        const double* b = biases_[static_cast<std::size_t>(l)].data();
        next.assign(static_cast<std::size_t>(out_n), 0.0);
        for (int o = 0; o < out_n; ++o) {
            const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_n);
            double z = b[o];
            for (int i = 0; i < in_n; ++i) {
                z += row[i] * cur[static_cast<std::size_t>(i)];
            }
            next[static_cast<std::size_t>(o)] = (l + 1 == layer_count()) ? z : activate(activation_, z);
        }
        cur.swap(next);
    }
    return cur;
}

double MlpNetwork::backprop(const std::vector<std::vector<double>>& inputs,
                            const std::vector<double>& targets,
                            const std::vector<int>& action_indices,
                            Gradients& out_grads) const {
    const std::size_t batch = inputs.size();
    if (batch == 0 || targets.size() != batch || action_indices.size() != batch) {
        throw DimensionMismatchError("batch arrays must be nonempty and of equal length");
    }
    const int layers = layer_count();

    out_grads.weights.resize(static_cast<std::size_t>(layers));
    out_grads.biases.resize(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
        out_grads.weights[static_cast<std::size_t>(l)].assign(weights_[static_cast<std::size_t>(l)].size(), 0.0);
        out_grads.biases[static_cast<std::size_t>(l)].assign(biases_[static_cast<std::size_t>(l)].size(), 0.0);
    }

    // Per-layer pre-activations and activations for one sample.
    std::vector<std::vector<double>> zs(static_cast<std::size_t>(layers));
    std::vector<std::vector<double>> acts(static_cast<std::size_t>(layers));
    std::vector<double> delta, prev_delta;

    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch);

    for (std::size_t s = 0; s < batch; ++s) {
        const std::vector<double>& x = inputs[s];
        if (static_cast<int>(x.size()) != input_size()) {
            throw DimensionMismatchError("input length " + std::to_string(x.size()) +
                                         ", network expects " + std::to_string(input_size()));
        }
        const int action = action_indices[s];
        if (action < 0 || action >= output_size()) {
            throw DimensionMismatchError("action index " + std::to_string(action) +
                                         " outside output of size " + std::to_string(output_size()));
        }

        // Forward pass, keeping intermediates.
        const std::vector<double>* cur = &x;
        for (int l = 0; l < layers; ++l) {
            const int out_n = sizes_[static_cast<std::size_t>(l) + 1];
            const int in_n = sizes_[static_cast<std::size_t>(l)];
            const double* w = weights_[static_cast<std::size_t>(l)].data();
            const double* b = biases_[static_cast<std::size_t>(l)].data();
            auto& z = zs[static_cast<std::size_t>(l)];
            auto& a = acts[static_cast<std::size_t>(l)];
            z.assign(static_cast<std::size_t>(out_n), 0.0);
            a.assign(static_cast<std::size_t>(out_n), 0.0);
            for (int o = 0; o < out_n; ++o) {
                const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_n);
                double acc = b[o];
                for (int i = 0; i < in_n; ++i) {
                    acc += row[i] * (*cur)[static_cast<std::size_t>(i)];
                }
                z[static_cast<std::size_t>(o)] = acc;
                a[static_cast<std::size_t>(o)] =
                    (l + 1 == layers) ? acc : activate(activation_, acc);
            }
            cur = &a;
        }

        const double pred = acts[static_cast<std::size_t>(layers - 1)][static_cast<std::size_t>(action)];
        const double err = pred - targets[s];
        loss += err * err;

        // Output delta: d(mean squared error)/d(output). Only the trained
        // action coordinate is nonzero.
        delta.assign(static_cast<std::size_t>(output_size()), 0.0);
        delta[static_cast<std::size_t>(action)] = 2.0 * err * inv_batch;

        for (int l = layers - 1; l >= 0; --l) {
            const int out_n = sizes_[static_cast<std::size_t>(l) + 1];
            const int in_n = sizes_[static_cast<std::size_t>(l)];
            const std::vector<double>& layer_in =
                (l == 0) ? x : acts[static_cast<std::size_t>(l - 1)];
            double* gw = out_grads.weights[static_cast<std::size_t>(l)].data();
            double* gb = out_grads.biases[static_cast<std::size_t>(l)].data();

            for (int o = 0; o < out_n; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                gb[o] += d;
                double* grow = gw + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_n);
                for (int i = 0; i < in_n; ++i) {
                    grow[i] += d * layer_in[static_cast<std::size_t>(i)];
                }
            }

            if (l == 0) break;

            // delta for the layer below: (W^T delta) * act'(z).
            prev_delta.assign(static_cast<std::size_t>(in_n), 0.0);
            const double* w = weights_[static_cast<std::size_t>(l)].data();
            for (int o = 0; o < out_n; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                if (d == 0.0) continue;
                const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(in_n);
                for (int i = 0; i < in_n; ++i) {
                    prev_delta[static_cast<std::size_t>(i)] += d * row[i];
                }
            }
            const auto& z_below = zs[static_cast<std::size_t>(l - 1)];
            const auto& a_below = acts[static_cast<std::size_t>(l - 1)];
            for (int i = 0; i < in_n; ++i) {
                prev_delta[static_cast<std::size_t>(i)] *=
                    activate_grad(activation_, z_below[static_cast<std::size_t>(i)],
                                  a_below[static_cast<std::size_t>(i)]);
            }
            delta.swap(prev_delta);
        }
    }

    return loss * inv_batch;
}

double MlpNetwork::train_batch(const std::vector<std::vector<double>>& inputs,
                               const std::vector<double>& targets,
                               const std::vector<int>& action_indices,
                               const TrainingConfig& cfg) {
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) {
        throw ConfigError("learning_rate must lie in (0, 1]");
    }
    Gradients grads;
    const double loss = backprop(inputs, targets, action_indices, grads);
    if (!std::isfinite(loss)) {
        throw NonFiniteLossError("batch loss is not finite");
    }
    const double lr = cfg.learning_rate;
    for (int l = 0; l < layer_count(); ++l) {
        auto& w = weights_[static_cast<std::size_t>(l)];
        auto& b = biases_[static_cast<std::size_t>(l)];
        const auto& gw = grads.weights[static_cast<std::size_t>(l)];
        const auto& gb = grads.biases[static_cast<std::size_t>(l)];
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] -= lr * gw[i];
            if (!std::isfinite(w[i])) throw NonFiniteLossError("non-finite weight after update");
        }
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] -= lr * gb[i];
            if (!std::isfinite(b[i])) throw NonFiniteLossError("non-finite bias after update");
        }
    }
    return loss;
}

namespace {

constexpr char kMagic[4] = {'Q', 'G', 'N', '1'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char buf[4];
    for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in) throw FormatError("truncated checkpoint file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw FormatError("truncated checkpoint file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_checkpoint(const MlpNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(net.layer_sizes().size()));
    for (int s : net.layer_sizes()) write_u32(out, static_cast<std::uint32_t>(s));
    for (int l = 0; l < net.layer_count(); ++l) {
        for (double w : net.weights(l)) write_f64(out, w);
        for (double b : net.biases(l)) write_f64(out, b);
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

MlpNetwork load_checkpoint(const std::filesystem::path& path, Activation activation) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("bad checkpoint magic in " + path.string());
    }
    const std::uint32_t version = read_u32(in);
    if (version != kVersion) {
        throw FormatError("checkpoint version " + std::to_string(version) + " unsupported, expected " +
                          std::to_string(kVersion));
    }
    const std::uint32_t count = read_u32(in);
    if (count < 2 || count > 64) {
        throw FormatError("implausible layer count " + std::to_string(count));
    }
    std::vector<int> sizes(count);
    for (auto& s : sizes) {
        const std::uint32_t v = read_u32(in);
        if (v == 0 || v > 1000000) throw FormatError("implausible layer size " + std::to_string(v));
        s = static_cast<int>(v);
    }
    MlpNetwork net(sizes, activation);
    for (int l = 0; l < net.layer_count(); ++l) {
        for (double& w : net.weights(l)) w = read_f64(in);
        for (double& b : net.biases(l)) b = read_f64(in);
    }
    in.peek();
    if (!in.eof()) throw FormatError("trailing data in checkpoint " + path.string());
    return net;
}

}  // namespace edgeq
