#include "heartcloak/dsp/iir.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "heartcloak/error.hpp"

namespace heartcloak::dsp {
namespace {

using cplx = std::complex<double>;

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double f_hz, double fs) {
  return 2.0 * fs * std::tan(std::numbers::pi * f_hz / fs);
}

Biquad section_from(cplx z1, cplx z2, double b0, double b1, double b2) {
  Biquad q;
  q.b0 = b0;
  q.b1 = b1;
  q.b2 = b2;
  q.a1 = -(z1 + z2).real();
  q.a2 = (z1 * z2).real();
  return q;
}

// Prototype poles grouped so that every group maps to one biquad: upper-half
// poles (their conjugates are implied) and, for odd order, the real pole.
struct ProtoPoles {
  std::vector<cplx> upper;
  bool has_real{false};
};

ProtoPoles prototype(int order) {
  ProtoPoles pp;
  for (int k = 0; k < order; ++k) {
    const double angle = std::numbers::pi / 2.0 +
                         std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    if (2 * k + 1 < order) pp.upper.push_back(std::polar(1.0, angle));
    if (2 * k + 1 == order) pp.has_real = true;
  }
  return pp;
}

void check_band(int order, double low_hz, double high_hz, double fs) {
  require(order >= 1, "filter order must be >= 1");
  require(fs > 0.0, "sample rate must be positive");
  require(low_hz > 0.0 && low_hz < high_hz, "band edges must satisfy 0 < low < high");
  require(high_hz < fs / 2.0, "band edge above Nyquist");
}

void normalize(std::vector<Biquad>& sections, double gain_now) {
  const double per = std::pow(1.0 / gain_now, 1.0 / static_cast<double>(sections.size()));
  for (auto& q : sections) {
    q.b0 *= per;
    q.b1 *= per;
    q.b2 *= per;
  }
}

// Band transformations produce two analog poles per prototype pole.
template <typename Transform>
std::vector<Biquad> design(int order, double fs, Transform transform, double b0, double b1,
                           double b2) {
  const ProtoPoles pp = prototype(order);
  std::vector<Biquad> sections;
  for (const cplx& p : pp.upper) {
    const auto [s1, s2] = transform(p);
    const cplx z1 = bilinear(s1, fs);
    const cplx z2 = bilinear(s2, fs);
    sections.push_back(section_from(z1, std::conj(z1), b0, b1, b2));
    sections.push_back(section_from(z2, std::conj(z2), b0, b1, b2));
  }
  if (pp.has_real) {
    const auto [s1, s2] = transform(cplx{-1.0, 0.0});
    sections.push_back(section_from(bilinear(s1, fs), bilinear(s2, fs), b0, b1, b2));
  }
  return sections;
}

}  // namespace

cplx Biquad::response(double omega) const {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

double Biquad::dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }

void SosFilter::append(const SosFilter& other) {
  sections_.insert(sections_.end(), other.sections_.begin(), other.sections_.end());
}

cplx SosFilter::response(double frequency_hz, double sample_rate_hz) const {
  const double omega = 2.0 * std::numbers::pi * frequency_hz / sample_rate_hz;
  cplx h{1.0, 0.0};
  for (const auto& q : sections_) h *= q.response(omega);
  return h;
}

namespace {

void run_sections(const std::vector<Biquad>& sections, std::vector<double>& x,
                  bool steady_start) {
  if (x.empty()) return;
  double scale = steady_start ? x.front() : 0.0;
  for (const auto& q : sections) {
    const double g = q.dc_gain();
    double s1 = scale * (g - q.b0);
    double s2 = scale * (q.b2 - q.a2 * g);
    for (double& v : x) {
      const double in = v;
      const double y = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * y + s2;
      s2 = q.b2 * in - q.a2 * y;
      v = y;
    }
    scale *= g;
  }
}

}  // namespace

std::vector<double> SosFilter::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  run_sections(sections_, y, false);
  return y;
}

std::vector<double> SosFilter::filtfilt(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n == 0 || sections_.empty()) return {x.begin(), x.end()};
  const std::size_t pad = n - 1;

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x.back() - x[n - 1 - i]);

  run_sections(sections_, ext, true);
  std::reverse(ext.begin(), ext.end());
  run_sections(sections_, ext, true);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

SosFilter butterworth_bandpass(int order, double low_hz, double high_hz, double fs) {
  check_band(order, low_hz, high_hz, fs);
  const double w1 = prewarp(low_hz, fs);
  const double w2 = prewarp(high_hz, fs);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;
  auto transform = [&](cplx p) {
    const cplx a = p * bw;
    const cplx root = std::sqrt(a * a - 4.0 * w0sq);
    return std::pair{(a + root) / 2.0, (a - root) / 2.0};
  };
  auto sections = design(order, fs, transform, 1.0, 0.0, -1.0);
  const double omega0 = 2.0 * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  SosFilter tmp(sections);
  normalize(sections, std::abs(tmp.response(omega0 * fs / (2.0 * std::numbers::pi), fs)));
  return SosFilter(std::move(sections));
}

SosFilter butterworth_bandstop(int order, double low_hz, double high_hz, double fs) {
  check_band(order, low_hz, high_hz, fs);
  const double w1 = prewarp(low_hz, fs);
  const double w2 = prewarp(high_hz, fs);
  const double w0sq = w1 * w2;
  const double bw = w2 - w1;
  auto transform = [&](cplx p) {
    const cplx a = bw / p;
    const cplx root = std::sqrt(a * a - 4.0 * w0sq);
    return std::pair{(a + root) / 2.0, (a - root) / 2.0};
  };
  const double omega0 = 2.0 * std::atan(std::sqrt(w0sq) / (2.0 * fs));
  auto sections = design(order, fs, transform, 1.0, -2.0 * std::cos(omega0), 1.0);
  double dc = 1.0;
  for (const auto& q : sections) dc *= q.dc_gain();
  normalize(sections, std::abs(dc));
  return SosFilter(std::move(sections));
}

}  // namespace heartcloak::dsp
