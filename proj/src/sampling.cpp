#include "ksopt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ksopt {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

constexpr double kRawClamp = 30.0;

struct AxisRealization {
  RVec locations;
  std::vector<Index> source;
};

AxisRealization realize_axis(const RVec& fixed, const RVec& raw) {
  const Index n = fixed.size() + raw.size();
  std::vector<std::pair<double, Index>> entries;
  entries.reserve(n);
  for (Index i = 0; i < fixed.size(); ++i) entries.emplace_back(fixed[i], -1);
  for (Index i = 0; i < raw.size(); ++i)
    entries.emplace_back(sigmoid(raw[i]), i);
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  AxisRealization out;
  out.locations = RVec(n);
  out.source.resize(n);
  for (Index i = 0; i < n; ++i) {
    out.locations[i] = entries[i].first;
    out.source[i] = entries[i].second;
  }
  return out;
}

double wrapped_distance(double k) { return std::min(k, 1.0 - k); }

RVec sample_center_block(Index grid, double center_fraction) {
  if (center_fraction < 0.0 || center_fraction > 0.2)
    throw std::invalid_argument("center_fraction must be in [0, 0.2]");
  const Index n = static_cast<Index>(std::llround(center_fraction * double(grid)));
  RVec fixed(n);
  // Integer bins around DC, wrapped: offsets -floor(n/2) .. ceil(n/2)-1.
  for (Index i = 0; i < n; ++i) {
    Index d = i - n / 2;
    Index bin = ((d % grid) + grid) % grid;
    fixed[i] = double(bin) / double(grid);
  }
  std::sort(fixed.begin(), fixed.end());
  return fixed;
}

RVec sample_variable_density(Rng& rng, Index count, double vd_sigma) {
  RVec locs(count);
  for (Index i = 0; i < count; ++i) {
    for (;;) {
      double u = rng.next_uniform();
      if (u >= 1.0) continue;  // keep strictly inside [0, 1)
      double d = wrapped_distance(u);
      double accept = std::exp(-d * d / (2.0 * vd_sigma * vd_sigma));
      if (rng.next_uniform() <= accept) {
        locs[i] = u;
        break;
      }
    }
  }
  return locs;
}

double logit(double y) { return std::log(y / (1.0 - y)); }

}  // namespace

Realization realize(const ThetaParams& p) {
  if (p.count_v() < 1) throw std::invalid_argument("realize: no locations");
  Realization r;
  AxisRealization v = realize_axis(p.fixed_v, p.free_raw_v);
  if (p.mode == ThetaParams::Mode::OneD) {
    r.sampler = Sampler1D(v.locations, p.grid_v);
    r.source_v = std::move(v.source);
  } else {
    if (p.count_h() < 1) throw std::invalid_argument("realize: no h locations");
    AxisRealization h = realize_axis(p.fixed_h, p.free_raw_h);
    Sampler2D s2;
    s2.vertical = Sampler1D(v.locations, p.grid_v);
    s2.horizontal = Sampler1D(h.locations, p.grid_h);
    r.sampler = s2;
    r.source_v = std::move(v.source);
    r.source_h = std::move(h.source);
  }
  return r;
}

ThetaParams init_variable_density(Rng& rng, ThetaParams::Mode mode,
                                  Index count_v, Index count_h, Index grid_v,
                                  Index grid_h, double center_fraction,
                                  double vd_sigma) {
  ThetaParams p;
  p.mode = mode;
  p.grid_v = grid_v;
  p.grid_h = grid_h;
  if (count_v < 1 || count_v > grid_v)
    throw std::invalid_argument("init: vertical count exceeds grid");
  p.fixed_v = sample_center_block(grid_v, center_fraction);
  if (p.fixed_v.size() > count_v)
    throw std::invalid_argument("init: center block exceeds vertical count");
  RVec free_v = sample_variable_density(rng, count_v - p.fixed_v.size(), vd_sigma);
  p.free_raw_v = RVec(free_v.size());
  for (Index i = 0; i < free_v.size(); ++i) p.free_raw_v[i] = logit(free_v[i]);

  if (mode == ThetaParams::Mode::TwoD) {
    if (count_h < 1 || count_h > grid_h)
      throw std::invalid_argument("init: horizontal count exceeds grid");
    p.fixed_h = sample_center_block(grid_h, center_fraction);
    if (p.fixed_h.size() > count_h)
      throw std::invalid_argument("init: center block exceeds horizontal count");
    RVec free_h =
        sample_variable_density(rng, count_h - p.fixed_h.size(), vd_sigma);
    p.free_raw_h = RVec(free_h.size());
    for (Index i = 0; i < free_h.size(); ++i) p.free_raw_h[i] = logit(free_h[i]);
  }
  clamp_raw(p);
  return p;
}

RVec raw_gradient(const ThetaParams& p, const Realization& r,
                  const RVec& d_vertical, const RVec& d_horizontal) {
  RVec g = RVec::Zero(p.trainable_count());
  if (d_vertical.size() != static_cast<Index>(r.source_v.size()))
    throw std::invalid_argument("raw_gradient: vertical size mismatch");
  for (Index i = 0; i < d_vertical.size(); ++i) {
    Index src = r.source_v[i];
    if (src < 0) continue;
    double s = sigmoid(p.free_raw_v[src]);
    g[src] += d_vertical[i] * s * (1.0 - s);
  }
  if (p.mode == ThetaParams::Mode::TwoD) {
    if (d_horizontal.size() != static_cast<Index>(r.source_h.size()))
      throw std::invalid_argument("raw_gradient: horizontal size mismatch");
    const Index off = p.free_raw_v.size();
    for (Index i = 0; i < d_horizontal.size(); ++i) {
      Index src = r.source_h[i];
      if (src < 0) continue;
      double s = sigmoid(p.free_raw_h[src]);
      g[off + src] += d_horizontal[i] * s * (1.0 - s);
    }
  }
  return g;
}

void clamp_raw(ThetaParams& p) {
  auto clamp = [](RVec& v) {
    for (Index i = 0; i < v.size(); ++i)
      v[i] = std::clamp(v[i], -kRawClamp, kRawClamp);
  };
  clamp(p.free_raw_v);
  clamp(p.free_raw_h);
}

void apply_grad(ThetaParams& p, const Realization& r, const RVec& d_vertical,
                const RVec& d_horizontal, double lr) {
  RVec g = raw_gradient(p, r, d_vertical, d_horizontal);
  const Index nv = p.free_raw_v.size();
  p.free_raw_v -= lr * g.head(nv);
  if (p.mode == ThetaParams::Mode::TwoD)
    p.free_raw_h -= lr * g.tail(g.size() - nv);
  clamp_raw(p);
}

void save_theta(const ThetaParams& p, const std::filesystem::path& dir,
                const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_pattern(realize(p).sampler, dir / (stem + ".pattern"));

  std::FILE* f = std::fopen((dir / (stem + ".theta")).string().c_str(), "w");
  if (!f) throw std::runtime_error("save_theta: cannot open sidecar");
  std::fprintf(f, "theta1 %s\n",
               p.mode == ThetaParams::Mode::OneD ? "1d" : "2d");
  std::fprintf(f, "grid %lld %lld\n", static_cast<long long>(p.grid_v),
               static_cast<long long>(p.grid_h));
  auto block = [f](const char* name, const RVec& v) {
    std::fprintf(f, "%s %lld\n", name, static_cast<long long>(v.size()));
    for (Index i = 0; i < v.size(); ++i) std::fprintf(f, "%.17g\n", v[i]);
  };
  block("fixed_v", p.fixed_v);
  block("free_raw_v", p.free_raw_v);
  block("fixed_h", p.fixed_h);
  block("free_raw_h", p.free_raw_h);
  std::fclose(f);
}

ThetaParams load_theta(const std::filesystem::path& dir,
                       const std::string& stem) {
  std::ifstream in(dir / (stem + ".theta"));
  if (!in) throw std::runtime_error("load_theta: missing sidecar");
  std::string tag, mode;
  in >> tag >> mode;
  if (tag != "theta1") throw std::runtime_error("load_theta: bad tag");
  ThetaParams p;
  p.mode = (mode == "1d") ? ThetaParams::Mode::OneD : ThetaParams::Mode::TwoD;
  auto block = [&in](const char* name, RVec& v) {
    std::string key;
    long long n = 0;
    in >> key >> n;
    if (key != name) throw std::runtime_error("load_theta: expected " +
                                              std::string(name));
    v = RVec(n);
    for (long long i = 0; i < n; ++i) {
      std::string s;
      in >> s;
      v[i] = std::stod(s);
    }
  };
  std::string key;
  in >> key;
  if (key != "grid") throw std::runtime_error("load_theta: expected grid");
  in >> p.grid_v >> p.grid_h;
  block("fixed_v", p.fixed_v);
  block("free_raw_v", p.free_raw_v);
  block("fixed_h", p.fixed_h);
  block("free_raw_h", p.free_raw_h);
  return p;
}

double mean_center_distance(const ThetaParams& p) {
  double acc = 0.0;
  Index n = 0;
  for (Index i = 0; i < p.free_raw_v.size(); ++i, ++n)
    acc += wrapped_distance(sigmoid(p.free_raw_v[i]));
  for (Index i = 0; i < p.free_raw_h.size(); ++i, ++n)
    acc += wrapped_distance(sigmoid(p.free_raw_h[i]));
  if (n == 0) return 0.0;
  return acc / double(n);
}

}  // namespace ksopt
