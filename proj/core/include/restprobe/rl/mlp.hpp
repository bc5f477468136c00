#pragma once

#include <vector>

#include <Eigen/Dense>

#include "restprobe/rand_util.hpp"

namespace restprobe::rl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Fully connected net with tanh hidden layers and a linear output layer.
/// Small enough that hand-written backprop stays simple and auditable.
struct Mlp {
    std::vector<MatrixXd> weights;  // weights[l]: (out_l, in_l)
    std::vector<VectorXd> biases;

    /// Cached per-layer outputs from a forward pass, needed by backward().
    struct Trace {
        VectorXd input;
        std::vector<VectorXd> activations;  // post-tanh for hidden, raw for final
    };

    struct Grads {
        std::vector<MatrixXd> weights;
        std::vector<VectorXd> biases;

        void setZero();
        void accumulate(const Grads& other, double scale = 1.0);
        double squared_norm() const;
        void scale(double s);
    };

    static Mlp make(int input_dim, int hidden_dim, int output_dim, int hidden_layers,
                    double output_gain, DetRng& rng);

    VectorXd forward(const VectorXd& input) const;
    VectorXd forward(const VectorXd& input, Trace& trace) const;

    /// Backpropagates dL/d(output) through the cached trace, accumulating
    /// parameter gradients into `grads` (which must match in shape).
    void backward(const Trace& trace, const VectorXd& output_grad, Grads& grads) const;

    Grads zero_grads() const;
    int input_dim() const { return static_cast<int>(weights.front().cols()); }
    int output_dim() const { return static_cast<int>(weights.back().rows()); }

    std::size_t parameter_count() const;
    bool all_finite() const;

    /// Flat views used by the Adam optimizer and checkpointing.
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);
};

/// Orthogonal matrix (rows x cols) scaled by gain, from a Gaussian draw via QR.
MatrixXd orthogonal_matrix(int rows, int cols, double gain, DetRng& rng);

}  // namespace restprobe::rl
