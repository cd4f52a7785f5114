#include "lecam/nn.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lecam/text_io.hpp"

namespace lecam {

namespace {

constexpr double kLeakySlope = 0.2;
constexpr int kCheckpointVersion = 1;

double activate(Activation a, double x) {
  switch (a) {
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::LeakyReLU: return x > 0.0 ? x : kLeakySlope * x;
    case Activation::Tanh: return std::tanh(x);
  }
  throw std::logic_error("nn: unknown activation");
}

// Derivative conventions at the kink: ReLU'(0) = 0, LeakyReLU'(0) = slope.
double activate_deriv(Activation a, double pre) {
  switch (a) {
    case Activation::ReLU: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::LeakyReLU: return pre > 0.0 ? 1.0 : kLeakySlope;
    case Activation::Tanh: {
      const double t = std::tanh(pre);
      return 1.0 - t * t;
    }
  }
  throw std::logic_error("nn: unknown activation");
}

// y[n x out] = x[n x in] * W^T[in x out] + b
void affine_forward(const Mat& x, const Mat& w, const std::vector<double>& b,
                    Mat& y) {
  const std::size_t n = x.rows(), in = x.cols(), out = w.rows();
  y = Mat(n, out);
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = x.row_ptr(r);
    double* yr = y.row_ptr(r);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wo = w.row_ptr(o);
      double acc = b[o];
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("nn: unknown activation '" + name + "'");
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Tanh: return "tanh";
  }
  throw std::logic_error("nn: unknown activation");
}

void MlpNet::validate_widths() const {
  if (widths_.size() < 2) {
    throw std::invalid_argument("nn: need at least input and output widths");
  }
  for (std::size_t w : widths_) {
    if (w == 0) throw std::invalid_argument("nn: zero layer width");
  }
}

MlpNet::MlpNet(const std::vector<std::size_t>& widths,
               Activation hidden_activation, Rng& rng)
    : widths_(widths), activation_(hidden_activation) {
  validate_widths();
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t in = widths_[l], out = widths_[l + 1];
    Mat w(out, in);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
    weights_.push_back(std::move(w));
    biases_.emplace_back(out, 0.0);
  }
}

MlpNet MlpNet::zeros(const std::vector<std::size_t>& widths,
                     Activation hidden_activation) {
  MlpNet net;
  net.widths_ = widths;
  net.activation_ = hidden_activation;
  net.validate_widths();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    net.weights_.emplace_back(widths[l + 1], widths[l]);
    net.biases_.emplace_back(widths[l + 1], 0.0);
  }
  return net;
}

std::size_t MlpNet::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    n += weights_[l].size() + biases_[l].size();
  }
  return n;
}

Mat MlpNet::forward(const Mat& batch, GradTape* tape) const {
  if (batch.cols() != input_dim()) {
    throw std::invalid_argument("nn: batch width " + std::to_string(batch.cols()) +
                                " != input dim " + std::to_string(input_dim()));
  }
  if (tape) {
    tape->layer_inputs.clear();
    tape->pre_activations.clear();
    tape->net_revision = revision_;
    tape->consumed = false;
  }
  Mat cur = batch;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (tape) tape->layer_inputs.push_back(cur);
    Mat pre;
    affine_forward(cur, weights_[l], biases_[l], pre);
    const bool is_output = (l + 1 == weights_.size());
    if (tape) tape->pre_activations.push_back(pre);
    if (is_output) {
      cur = std::move(pre);  // linear output layer
    } else {
      Mat act(pre.rows(), pre.cols());
      for (std::size_t k = 0; k < pre.size(); ++k) {
        act.data()[k] = activate(activation_, pre.data()[k]);
      }
      cur = std::move(act);
    }
  }
  return cur;
}

NetGrads backward(const MlpNet& net, GradTape& tape, const Mat& output_grads,
                  Mat* input_grads) {
  if (tape.consumed) {
    throw std::logic_error("nn: tape already consumed");
  }
  if (tape.net_revision != net.revision()) {
    throw std::logic_error("nn: tape is stale (net was updated)");
  }
  if (tape.layer_inputs.size() != net.num_layers()) {
    throw std::logic_error("nn: tape does not match net");
  }
  const Mat& last_pre = tape.pre_activations.back();
  if (!output_grads.same_shape(last_pre)) {
    throw std::invalid_argument("nn: output_grads shape mismatch");
  }
  tape.consumed = true;

  NetGrads grads;
  grads.weights.resize(net.num_layers());
  grads.biases.resize(net.num_layers());

  Mat delta = output_grads;  // gradient w.r.t. the current layer's output
  for (std::size_t li = net.num_layers(); li-- > 0;) {
    const bool is_output = (li + 1 == net.num_layers());
    if (!is_output) {
      // Through the activation: delta *= act'(pre)
      const Mat& pre = tape.pre_activations[li];
      for (std::size_t k = 0; k < delta.size(); ++k) {
        delta.data()[k] *= activate_deriv(net.hidden_activation(), pre.data()[k]);
      }
    }
    const Mat& x = tape.layer_inputs[li];
    const Mat& w = net.weights()[li];
    const std::size_t n = x.rows(), in = x.cols(), out = w.rows();

    // dW[o][i] = sum_r delta[r][o] * x[r][i];  db[o] = sum_r delta[r][o]
    Mat dw(out, in);
    std::vector<double> db(out, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double* dr = delta.row_ptr(r);
      const double* xr = x.row_ptr(r);
      for (std::size_t o = 0; o < out; ++o) {
        const double d = dr[o];
        db[o] += d;
        double* dwo = dw.row_ptr(o);
        for (std::size_t i = 0; i < in; ++i) dwo[i] += d * xr[i];
      }
    }
    grads.weights[li] = std::move(dw);
    grads.biases[li] = std::move(db);

    const bool need_input = li > 0 || input_grads != nullptr;
    if (need_input) {
      // dx[r][i] = sum_o delta[r][o] * W[o][i]
      Mat dx(n, in);
      for (std::size_t r = 0; r < n; ++r) {
        const double* dr = delta.row_ptr(r);
        double* dxr = dx.row_ptr(r);
        for (std::size_t o = 0; o < out; ++o) {
          const double d = dr[o];
          const double* wo = w.row_ptr(o);
          for (std::size_t i = 0; i < in; ++i) dxr[i] += d * wo[i];
        }
      }
      if (li == 0 && input_grads) {
        *input_grads = std::move(dx);
      } else {
        delta = std::move(dx);
      }
    }
  }
  return grads;
}

AdamState::AdamState(const MlpNet& net, double learning_rate)
    : lr(learning_rate) {
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    m_weights.emplace_back(net.weights()[l].rows(), net.weights()[l].cols());
    v_weights.emplace_back(net.weights()[l].rows(), net.weights()[l].cols());
    m_biases.emplace_back(net.biases()[l].size(), 0.0);
    v_biases.emplace_back(net.biases()[l].size(), 0.0);
  }
}

bool adam_step(AdamState& state, MlpNet& net, const NetGrads& grads) {
  if (grads.weights.size() != net.num_layers() ||
      grads.biases.size() != net.num_layers()) {
    throw std::invalid_argument("nn: gradient/net layer count mismatch");
  }
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    if (!grads.weights[l].same_shape(net.weights()[l]) ||
        grads.biases[l].size() != net.biases()[l].size()) {
      throw std::invalid_argument("nn: gradient shape mismatch");
    }
    for (double g : grads.weights[l].data()) {
      if (!std::isfinite(g)) return false;
    }
    for (double g : grads.biases[l]) {
      if (!std::isfinite(g)) return false;
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](double& param, double& m, double& v, double g) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g * g;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
  };

  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto& w = net.weights()[l].data();
    auto& mw = state.m_weights[l].data();
    auto& vw = state.v_weights[l].data();
    const auto& gw = grads.weights[l].data();
    for (std::size_t k = 0; k < w.size(); ++k) update(w[k], mw[k], vw[k], gw[k]);

    auto& b = net.biases()[l];
    auto& mb = state.m_biases[l];
    auto& vb = state.v_biases[l];
    const auto& gb = grads.biases[l];
    for (std::size_t k = 0; k < b.size(); ++k) update(b[k], mb[k], vb[k], gb[k]);
  }
  net.bump_revision();
  return true;
}

void MlpNet::save(const std::string& path) const {
  std::ostringstream out;
  out << "mlp-checkpoint " << kCheckpointVersion << "\n";
  out << "activation " << to_string(activation_) << "\n";
  out << "widths";
  for (std::size_t w : widths_) out << ' ' << w;
  out << "\n";
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out << "layer " << l << "\n";
    const Mat& w = weights_[l];
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) {
        out << (c ? " " : "") << format_double(w(r, c));
      }
      out << "\n";
    }
    const auto& b = biases_[l];
    for (std::size_t k = 0; k < b.size(); ++k) {
      out << (k ? " " : "") << format_double(b[k]);
    }
    out << "\n";
  }
  write_file(path, out.str());
}

MlpNet MlpNet::load(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != "mlp-checkpoint" || version != kCheckpointVersion) {
    throw std::runtime_error("nn: '" + path + "' is not a v" +
                             std::to_string(kCheckpointVersion) + " checkpoint");
  }
  std::string act_name;
  in >> tag >> act_name;
  if (tag != "activation") throw std::runtime_error("nn: bad checkpoint header");

  in >> tag;
  if (tag != "widths") throw std::runtime_error("nn: bad checkpoint header");
  std::vector<std::size_t> widths;
  {
    std::string rest;
    std::getline(in, rest);
    std::istringstream ws(rest);
    std::size_t w;
    while (ws >> w) widths.push_back(w);
  }

  MlpNet net = MlpNet::zeros(widths, activation_from_string(act_name));
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    std::size_t index = 0;
    in >> tag >> index;
    if (tag != "layer" || index != l) {
      throw std::runtime_error("nn: bad checkpoint layer header");
    }
    for (double& v : net.weights_[l].data()) {
      if (!(in >> v)) throw std::runtime_error("nn: truncated checkpoint");
    }
    for (double& v : net.biases_[l]) {
      if (!(in >> v)) throw std::runtime_error("nn: truncated checkpoint");
    }
  }
  return net;
}

}  // namespace lecam
