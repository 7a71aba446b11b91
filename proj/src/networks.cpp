#include "s2cgan/networks.hpp"

#include <random>

#include "s2cgan/error.hpp"
#include "s2cgan/rng.hpp"

namespace s2cgan {

void GeneratorNoise::validate() const {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout_rate must lie in [0, 1)");
  }
}

namespace {

constexpr std::uint64_t kDropStreamU1 = 1;
constexpr std::uint64_t kDropStreamU2 = 2;

double dropout_rate_of(const GeneratorSpec& spec) {
  spec.noise.validate();
  return spec.noise.mode == NoiseMode::kDropout ? spec.noise.dropout_rate : 0.0;
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.data();
  const T* s = src.data();
  for (std::size_t k = 0; k < dst.size(); ++k) d[k] += s[k];
}

}  // namespace

// -------------------------------------------------------------- Generator

template <typename T>
Generator<T>::Generator(const GeneratorSpec& spec)
    : spec_(spec),
      down1_("g.down1", spec.bands, spec.base_channels, spec.kernel, 2, 1),
      down2_("g.down2", spec.base_channels, 2 * spec.base_channels, spec.kernel, 2, 1),
      down3_("g.down3", 2 * spec.base_channels, 4 * spec.base_channels, spec.kernel, 2, 1),
      norm_d2_("g.norm_down2", 2 * spec.base_channels),
      norm_d3_("g.norm_down3", 4 * spec.base_channels),
      act_d1_(spec.leaky_slope),
      act_d2_(spec.leaky_slope),
      act_d3_(spec.leaky_slope),
      up1_("g.up1", 4 * spec.base_channels, 2 * spec.base_channels, spec.kernel, 2, 1),
      up2_("g.up2", 4 * spec.base_channels, spec.base_channels, spec.kernel, 2, 1),
      up3_("g.up3", 2 * spec.base_channels, spec.bands, spec.kernel, 2, 1),
      norm_u1_("g.norm_up1", 2 * spec.base_channels),
      norm_u2_("g.norm_up2", spec.base_channels),
      act_u1_(0.0),
      act_u2_(0.0),
      drop_u1_(dropout_rate_of(spec), kDropStreamU1),
      drop_u2_(dropout_rate_of(spec), kDropStreamU2) {
  if (spec.bands < 1 || spec.base_channels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "generator needs bands >= 1 and base_channels >= 1");
  }
  if (spec.kernel != 4) {
    // Spatial doubling/halving with stride 2 and padding 1 needs kernel 4.
    throw Error(ErrorCode::kInvalidArgument, "generator kernel must be 4");
  }
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& x, std::span<const std::uint64_t> sample_seeds) {
  if (x.h() % 8 != 0 || x.w() % 8 != 0 || x.h() == 0 || x.w() == 0) {
    throw Error(ErrorCode::kBadSpatialDims,
                "generator input " + x.shape_string() + " must have H, W divisible by 8");
  }
  if (x.c() != spec_.bands) {
    throw Error(ErrorCode::kShapeMismatch, "generator expects " + std::to_string(spec_.bands) +
                                               " bands, got " + std::to_string(x.c()));
  }
  const bool noisy = spec_.noise.mode == NoiseMode::kDropout && noise_active_;
  if (noisy && sample_seeds.size() < static_cast<std::size_t>(x.n())) {
    throw Error(ErrorCode::kInvalidArgument, "one noise seed per sample required");
  }
  Tensor<T> e1 = act_d1_.forward(down1_.forward(x));
  Tensor<T> e2 = act_d2_.forward(norm_d2_.forward(down2_.forward(e1)));
  Tensor<T> e3 = act_d3_.forward(norm_d3_.forward(down3_.forward(e2)));

  Tensor<T> u1 = drop_u1_.forward(act_u1_.forward(norm_u1_.forward(up1_.forward(e3))),
                                  sample_seeds, noisy);
  skip2_channels_ = e2.c();
  Tensor<T> u2 = drop_u2_.forward(
      act_u2_.forward(norm_u2_.forward(up2_.forward(concat_channels(u1, e2)))), sample_seeds,
      noisy);
  skip1_channels_ = e1.c();
  return out_act_.forward(up3_.forward(concat_channels(u2, e1)));
}

template <typename T>
Tensor<T> Generator<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g_cat2 = up3_.backward(out_act_.backward(grad_out));
  auto [g_u2, g_e1_skip] = split_channels(g_cat2, g_cat2.c() - skip1_channels_);

  Tensor<T> g_cat1 = up2_.backward(norm_u2_.backward(act_u2_.backward(drop_u2_.backward(g_u2))));
  auto [g_u1, g_e2_skip] = split_channels(g_cat1, g_cat1.c() - skip2_channels_);

  Tensor<T> g_e3 = up1_.backward(norm_u1_.backward(act_u1_.backward(drop_u1_.backward(g_u1))));
  Tensor<T> g_e2 = down3_.backward(norm_d3_.backward(act_d3_.backward(g_e3)));
  add_into(g_e2, g_e2_skip);
  Tensor<T> g_e1 = down2_.backward(norm_d2_.backward(act_d2_.backward(g_e2)));
  add_into(g_e1, g_e1_skip);
  return down1_.backward(act_d1_.backward(g_e1));
}

template <typename T>
std::vector<Parameter<T>*> Generator<T>::parameters() {
  return {&down1_.weight(),  &down1_.bias(),  &down2_.weight(),  &down2_.bias(),
          &norm_d2_.scale(), &norm_d2_.shift(), &down3_.weight(), &down3_.bias(),
          &norm_d3_.scale(), &norm_d3_.shift(), &up1_.weight(),   &up1_.bias(),
          &norm_u1_.scale(), &norm_u1_.shift(), &up2_.weight(),   &up2_.bias(),
          &norm_u2_.scale(), &norm_u2_.shift(), &up3_.weight(),   &up3_.bias()};
}

template <typename T>
std::vector<const Parameter<T>*> Generator<T>::parameters() const {
  auto mutable_params = const_cast<Generator<T>*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

template <typename T>
void Generator<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
void Generator<T>::set_backend(KernelBackend backend) {
  down1_.set_backend(backend);
  down2_.set_backend(backend);
  down3_.set_backend(backend);
  up1_.set_backend(backend);
  up2_.set_backend(backend);
  up3_.set_backend(backend);
}

// ---------------------------------------------------------- Discriminator

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorSpec& spec)
    : spec_(spec),
      conv1_("d.conv1", 2 * spec.bands, spec.hidden_channels, 1, 1, 0),
      conv2_("d.conv2", spec.hidden_channels, 1, 1, 1, 0),
      act1_(spec.leaky_slope) {
  if (spec.bands < 1 || spec.hidden_channels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "discriminator needs bands >= 1 and hidden >= 1");
  }
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& condition, const Tensor<T>& candidate) {
  if (!condition.same_shape(candidate)) {
    throw Error(ErrorCode::kShapeMismatch, "discriminator inputs " + condition.shape_string() +
                                               " vs " + candidate.shape_string());
  }
  if (condition.c() != spec_.bands) {
    throw Error(ErrorCode::kShapeMismatch, "discriminator expects " +
                                               std::to_string(spec_.bands) + " bands");
  }
  return out_act_.forward(conv2_.forward(act1_.forward(conv1_.forward(concat_channels(condition, candidate)))));
}

template <typename T>
Tensor<T> Discriminator<T>::backward(const Tensor<T>& grad_scores) {
  Tensor<T> g_in = conv1_.backward(act1_.backward(conv2_.backward(out_act_.backward(grad_scores))));
  return split_channels(g_in, spec_.bands).second;
}

template <typename T>
std::vector<Parameter<T>*> Discriminator<T>::parameters() {
  return {&conv1_.weight(), &conv1_.bias(), &conv2_.weight(), &conv2_.bias()};
}

template <typename T>
std::vector<const Parameter<T>*> Discriminator<T>::parameters() const {
  auto mutable_params = const_cast<Discriminator<T>*>(this)->parameters();
  return {mutable_params.begin(), mutable_params.end()};
}

template <typename T>
void Discriminator<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
void Discriminator<T>::set_backend(KernelBackend backend) {
  conv1_.set_backend(backend);
  conv2_.set_backend(backend);
}

// ------------------------------------------------------------------ init

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

template <typename T>
void init_params(std::vector<Parameter<T>*> params, std::uint64_t seed) {
  for (std::size_t idx = 0; idx < params.size(); ++idx) {
    Parameter<T>& p = *params[idx];
    Engine engine = make_engine(seed, {idx});
    double mean = 0.0;
    double stddev = 0.0;
    if (ends_with(p.name, ".weight")) {
      stddev = 0.02;
    } else if (ends_with(p.name, ".scale")) {
      mean = 1.0;
      stddev = 0.02;
    }
    if (stddev == 0.0) {
      std::fill(p.value.begin(), p.value.end(), static_cast<T>(mean));
    } else {
      std::normal_distribution<double> dist(mean, stddev);
      for (auto& v : p.value) v = static_cast<T>(dist(engine));
    }
    p.zero_grad();
    std::fill(p.velocity.begin(), p.velocity.end(), T{0});
  }
}

template <typename To, typename From>
void copy_parameters(const std::vector<const Parameter<From>*>& src,
                     const std::vector<Parameter<To>*>& dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorCode::kShapeMismatch, "parameter lists differ in length");
  }
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i]->shape != dst[i]->shape) {
      throw Error(ErrorCode::kShapeMismatch, "parameter shape differs: " + src[i]->name);
    }
    for (std::size_t k = 0; k < src[i]->size(); ++k) {
      dst[i]->value[k] = static_cast<To>(src[i]->value[k]);
    }
  }
}

template class Generator<float>;
template class Generator<double>;
template class Discriminator<float>;
template class Discriminator<double>;
template void init_params<float>(std::vector<Parameter<float>*>, std::uint64_t);
template void init_params<double>(std::vector<Parameter<double>*>, std::uint64_t);
template void copy_parameters<float, float>(const std::vector<const Parameter<float>*>&, const std::vector<Parameter<float>*>&);
template void copy_parameters<double, float>(const std::vector<const Parameter<float>*>&, const std::vector<Parameter<double>*>&);
template void copy_parameters<float, double>(const std::vector<const Parameter<double>*>&, const std::vector<Parameter<float>*>&);
template void copy_parameters<double, double>(const std::vector<const Parameter<double>*>&, const std::vector<Parameter<double>*>&);

}  // namespace s2cgan
