#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "edgeq/errors.hpp"

namespace edgeq {

enum class Activation { Relu, Tanh };

std::string_view activation_name(Activation act);
Activation activation_from_name(std::string_view name);  // throws ConfigError

struct TrainingConfig {
    double learning_rate = 0.001;  // must lie in (0, 1]
};

// Per-layer parameter gradients, same shapes as the network parameters.
struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Fully connected feed-forward network. Hidden layers use the configured
// activation, the output layer is linear. Weight matrices are row-major
// (rows = outputs of the layer, columns = inputs).
//
// Training follows a single-writer model: train_batch mutates the instance
// and must be externally serialized. forward() on an instance nobody is
// training may run from any number of threads.
class MlpNetwork {
public:
    MlpNetwork(std::vector<int> layer_sizes, Activation activation);

    // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
    static MlpNetwork glorot_init(std::vector<int> layer_sizes, Activation activation,
                                  std::uint64_t seed);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    Activation activation() const { return activation_; }
    int input_size() const { return sizes_.front(); }
    int output_size() const { return sizes_.back(); }
    int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }

    std::vector<double>& weights(int layer) { return weights_[static_cast<std::size_t>(layer)]; }
    std::vector<double>& biases(int layer) { return biases_[static_cast<std::size_t>(layer)]; }
    const std::vector<double>& weights(int layer) const { return weights_[static_cast<std::size_t>(layer)]; }
    const std::vector<double>& biases(int layer) const { return biases_[static_cast<std::size_t>(layer)]; }

    bool parameters_equal(const MlpNetwork& other) const;

    // Throws DimensionMismatchError when input length != input_size().
    std::vector<double> forward(const std::vector<double>& input) const;

    // Mean squared error over the batch between the output at each sample's
    // action index and that sample's scalar target; all other output
    // coordinates receive zero gradient. Returns the loss and the averaged
    // parameter gradients without touching the network.
    double backprop(const std::vector<std::vector<double>>& inputs,
                    const std::vector<double>& targets,
                    const std::vector<int>& action_indices,
                    Gradients& out_grads) const;

    // One SGD step on the batch MSE. Returns the loss before the update.
    // Throws NonFiniteLossError if the loss or any updated parameter is not
    // finite.
    double train_batch(const std::vector<std::vector<double>>& inputs,
                       const std::vector<double>& targets,
                       const std::vector<int>& action_indices,
                       const TrainingConfig& cfg);

private:
    std::vector<int> sizes_;
    Activation activation_;
    std::vector<std::vector<double>> weights_;  // [layer][out * in]
    std::vector<std::vector<double>> biases_;   // [layer][out]
};

// Little-endian binary checkpoint: magic "QGN1", version u32, layer-size
// list, then row-major weight and bias arrays per layer. The activation is
// not part of the file; the loader takes it from its caller.
void save_checkpoint(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load_checkpoint(const std::filesystem::path& path, Activation activation = Activation::Relu);

}  // namespace edgeq
