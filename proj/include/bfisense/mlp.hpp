#pragma once

// Three-layer fully connected regressor (input, one hidden layer, output)
// trained with minibatch SGD + momentum on a squared-error loss.

#include <cstdint>
#include <string>

#include "bfisense/numerics.hpp"

namespace bfisense {

enum class Activation { relu, tanh, sigmoid };

Activation activation_from_string(const std::string& s);
const char* to_string(Activation a);

struct MlpSpec {
    int n_in = 1;
    int hidden = 128;
    int n_out = 2;
    Activation activation = Activation::relu;
    int epochs = 200;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int batch_size = 64;
    std::uint64_t seed = 1;

    void validate() const;
};

class Mlp {
public:
    explicit Mlp(const MlpSpec& spec);

    const MlpSpec& spec() const { return spec_; }

    /// Rows are samples.
    RealMatrix predict(const RealMatrix& x) const;

    /// 1/(2B) sum_b ||f(x_b) - y_b||^2.
    double loss(const RealMatrix& x, const RealMatrix& y) const;

    /// Gradient of loss() w.r.t. parameters(), by backpropagation.
    RealVector gradient(const RealMatrix& x, const RealMatrix& y) const;

    /// W1, b1, W2, b2 flattened column-major in that order.
    RealVector parameters() const;
    void set_parameters(const RealVector& p);

    /// Shuffled minibatches, order drawn from spec.seed.
    void train(const RealMatrix& x, const RealMatrix& y);

private:
    MlpSpec spec_;
    RealMatrix w1_; // hidden x n_in
    RealVector b1_;
    RealMatrix w2_; // n_out x hidden
    RealVector b2_;
};

} // namespace bfisense
