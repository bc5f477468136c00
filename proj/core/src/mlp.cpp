#include "restprobe/rl/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace restprobe::rl {

MatrixXd orthogonal_matrix(int rows, int cols, double gain, DetRng& rng) {
    const int big = std::max(rows, cols);
    const int small = std::min(rows, cols);
    MatrixXd gauss(big, small);
    for (int i = 0; i < big; ++i)
        for (int j = 0; j < small; ++j) gauss(i, j) = rng.normal();
    Eigen::HouseholderQR<MatrixXd> qr(gauss);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(big, small);
    // Fix signs so the decomposition is unique given the draw.
    MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
    for (int j = 0; j < small; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    MatrixXd out = (rows >= cols) ? q : MatrixXd(q.transpose());
    return gain * out;
}

Mlp Mlp::make(int input_dim, int hidden_dim, int output_dim, int hidden_layers,
              double output_gain, DetRng& rng) {
    Mlp net;
    const double hidden_gain = std::sqrt(2.0);
    int in = input_dim;
    for (int l = 0; l < hidden_layers; ++l) {
        net.weights.push_back(orthogonal_matrix(hidden_dim, in, hidden_gain, rng));
        net.biases.push_back(VectorXd::Zero(hidden_dim));
        in = hidden_dim;
    }
    net.weights.push_back(orthogonal_matrix(output_dim, in, output_gain, rng));
    net.biases.push_back(VectorXd::Zero(output_dim));
    return net;
}

VectorXd Mlp::forward(const VectorXd& input) const {
    Trace scratch;
    return forward(input, scratch);
}

VectorXd Mlp::forward(const VectorXd& input, Trace& trace) const {
    if (input.size() != weights.front().cols())
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    trace.input = input;
    trace.activations.clear();
    VectorXd h = input;
    const std::size_t last = weights.size() - 1;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        h = weights[l] * h + biases[l];
        if (l != last) h = h.array().tanh().matrix();
        trace.activations.push_back(h);
    }
    return h;
}

void Mlp::backward(const Trace& trace, const VectorXd& output_grad, Grads& grads) const {
    VectorXd delta = output_grad;  // dL/d(pre-activation of final layer), final layer is linear
    for (int l = static_cast<int>(weights.size()) - 1; l >= 0; --l) {
        const VectorXd& layer_in = (l == 0) ? trace.input : trace.activations[l - 1];
        grads.weights[l] += delta * layer_in.transpose();
        grads.biases[l] += delta;
        if (l > 0) {
            VectorXd upstream = weights[l].transpose() * delta;
            const VectorXd& act = trace.activations[l - 1];  // tanh output
            delta = (upstream.array() * (1.0 - act.array().square())).matrix();
        }
    }
}

void Mlp::Grads::setZero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

void Mlp::Grads::accumulate(const Grads& other, double scale) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += scale * other.weights[l];
        biases[l] += scale * other.biases[l];
    }
}

double Mlp::Grads::squared_norm() const {
    double s = 0;
    for (const auto& w : weights) s += w.squaredNorm();
    for (const auto& b : biases) s += b.squaredNorm();
    return s;
}

void Mlp::Grads::scale(double s) {
    for (auto& w : weights) w *= s;
    for (auto& b : biases) b *= s;
}

Mlp::Grads Mlp::zero_grads() const {
    Grads g;
    for (const auto& w : weights) g.weights.push_back(MatrixXd::Zero(w.rows(), w.cols()));
    for (const auto& b : biases) g.biases.push_back(VectorXd::Zero(b.size()));
    return g;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
    for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
    return n;
}

bool Mlp::all_finite() const {
    for (const auto& w : weights)
        if (!w.allFinite()) return false;
    for (const auto& b : biases)
        if (!b.allFinite()) return false;
    return true;
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& w : weights)
        for (int j = 0; j < w.cols(); ++j)
            for (int i = 0; i < w.rows(); ++i) flat.push_back(w(i, j));
    for (const auto& b : biases)
        for (int i = 0; i < b.size(); ++i) flat.push_back(b(i));
    return flat;
}

void Mlp::unflatten(const std::vector<double>& flat) {
    if (flat.size() != parameter_count())
        throw std::invalid_argument("Mlp::unflatten: size mismatch");
    std::size_t k = 0;
    for (auto& w : weights)
        for (int j = 0; j < w.cols(); ++j)
            for (int i = 0; i < w.rows(); ++i) w(i, j) = flat[k++];
    for (auto& b : biases)
        for (int i = 0; i < b.size(); ++i) b(i) = flat[k++];
}

}  // namespace restprobe::rl
