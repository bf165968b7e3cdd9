#include "bfisense/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bfisense {

namespace {

RealMatrix activate(const RealMatrix& z, Activation a)
{
    switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::sigmoid: return (1.0 / (1.0 + (-z.array()).exp())).matrix();
    }
    return z;
}

// Derivative expressed through the pre-activation z and output h.
RealMatrix activate_grad(const RealMatrix& z, const RealMatrix& h, Activation a)
{
    switch (a) {
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - h.array().square()).matrix();
    case Activation::sigmoid: return (h.array() * (1.0 - h.array())).matrix();
    }
    return RealMatrix::Ones(z.rows(), z.cols());
}

} // namespace

Activation activation_from_string(const std::string& s)
{
    if (s == "relu")
        return Activation::relu;
    if (s == "tanh")
        return Activation::tanh;
    if (s == "sigmoid")
        return Activation::sigmoid;
    throw InvalidInput("unknown activation '" + s + "'");
}

const char* to_string(Activation a)
{
    switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    }
    return "?";
}

void MlpSpec::validate() const
{
    if (n_in < 1 || hidden < 1 || n_out < 1)
        throw InvalidInput("mlp: layer sizes must be positive");
    if (epochs < 0 || batch_size < 1)
        throw InvalidInput("mlp: epochs must be >= 0 and batch_size >= 1");
    if (!(learning_rate > 0.0) || !(momentum >= 0.0 && momentum < 1.0))
        throw InvalidInput("mlp: need learning_rate > 0 and 0 <= momentum < 1");
}

Mlp::Mlp(const MlpSpec& spec) : spec_(spec)
{
    spec_.validate();
    std::mt19937_64 rng(spec_.seed);
    // He initialization for the hidden layer, Glorot-style for the output.
    std::normal_distribution<double> n1(0.0, std::sqrt(2.0 / spec_.n_in));
    std::normal_distribution<double> n2(0.0, std::sqrt(1.0 / spec_.hidden));
    w1_.resize(spec_.hidden, spec_.n_in);
    for (Eigen::Index j = 0; j < w1_.cols(); ++j)
        for (Eigen::Index i = 0; i < w1_.rows(); ++i)
            w1_(i, j) = n1(rng);
    b1_ = RealVector::Zero(spec_.hidden);
    w2_.resize(spec_.n_out, spec_.hidden);
    for (Eigen::Index j = 0; j < w2_.cols(); ++j)
        for (Eigen::Index i = 0; i < w2_.rows(); ++i)
            w2_(i, j) = n2(rng);
    b2_ = RealVector::Zero(spec_.n_out);
}

RealMatrix Mlp::predict(const RealMatrix& x) const
{
    if (x.cols() != spec_.n_in)
        throw InvalidInput("mlp: input has " + std::to_string(x.cols()) + " features, expected " + std::to_string(spec_.n_in));
    const RealMatrix z1 = (x * w1_.transpose()).rowwise() + b1_.transpose();
    const RealMatrix h1 = activate(z1, spec_.activation);
    return (h1 * w2_.transpose()).rowwise() + b2_.transpose();
}

double Mlp::loss(const RealMatrix& x, const RealMatrix& y) const
{
    const RealMatrix diff = predict(x) - y;
    return 0.5 * diff.squaredNorm() / double(x.rows());
}

RealVector Mlp::gradient(const RealMatrix& x, const RealMatrix& y) const
{
    const double inv_b = 1.0 / double(x.rows());
    const RealMatrix z1 = (x * w1_.transpose()).rowwise() + b1_.transpose();
    const RealMatrix h1 = activate(z1, spec_.activation);
    const RealMatrix out = (h1 * w2_.transpose()).rowwise() + b2_.transpose();
    const RealMatrix d_out = (out - y) * inv_b;                        // B x n_out
    const RealMatrix d_h1 = d_out * w2_;                               // B x hidden
    const RealMatrix d_z1 = d_h1.cwiseProduct(activate_grad(z1, h1, spec_.activation));

    const RealMatrix g_w1 = d_z1.transpose() * x;
    const RealVector g_b1 = d_z1.colwise().sum().transpose();
    const RealMatrix g_w2 = d_out.transpose() * h1;
    const RealVector g_b2 = d_out.colwise().sum().transpose();

    RealVector g(w1_.size() + b1_.size() + w2_.size() + b2_.size());
    Eigen::Index o = 0;
    g.segment(o, g_w1.size()) = g_w1.reshaped();
    o += g_w1.size();
    g.segment(o, g_b1.size()) = g_b1;
    o += g_b1.size();
    g.segment(o, g_w2.size()) = g_w2.reshaped();
    o += g_w2.size();
    g.segment(o, g_b2.size()) = g_b2;
    return g;
}

RealVector Mlp::parameters() const
{
    RealVector p(w1_.size() + b1_.size() + w2_.size() + b2_.size());
    p << w1_.reshaped(), b1_, w2_.reshaped(), b2_;
    return p;
}

void Mlp::set_parameters(const RealVector& p)
{
    if (p.size() != w1_.size() + b1_.size() + w2_.size() + b2_.size())
        throw InvalidInput("mlp: parameter vector has the wrong length");
    Eigen::Index o = 0;
    w1_.reshaped() = p.segment(o, w1_.size());
    o += w1_.size();
    b1_ = p.segment(o, b1_.size());
    o += b1_.size();
    w2_.reshaped() = p.segment(o, w2_.size());
    o += w2_.size();
    b2_ = p.segment(o, b2_.size());
}

void Mlp::train(const RealMatrix& x, const RealMatrix& y)
{
    if (x.rows() != y.rows() || y.cols() != spec_.n_out)
        throw InvalidInput("mlp: inputs and targets do not line up");
    if (x.rows() == 0)
        return;
    std::mt19937_64 rng(derive_seed(spec_.seed, 0x7261696eULL));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index(0));

    RealVector params = parameters();
    RealVector velocity = RealVector::Zero(params.size());
    const Eigen::Index batch = spec_.batch_size;
    for (int epoch = 0; epoch < spec_.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < x.rows(); start += batch) {
            const Eigen::Index len = std::min(batch, x.rows() - start);
            RealMatrix xb(len, x.cols());
            RealMatrix yb(len, y.cols());
            for (Eigen::Index i = 0; i < len; ++i) {
                xb.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
                yb.row(i) = y.row(order[static_cast<std::size_t>(start + i)]);
            }
            velocity = spec_.momentum * velocity - spec_.learning_rate * gradient(xb, yb);
            params += velocity;
            set_parameters(params);
        }
    }
}

} // namespace bfisense
