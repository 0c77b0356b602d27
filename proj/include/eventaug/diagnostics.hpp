// Copyright 2026 The eventaug Authors.
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Distribution diagnostics for before/after augmentation comparisons.
//
// export_plots() writes into out_dir:
//   histogram.csv      bin_lo,bin_hi,count_before,count_after   (pooled values)
//   pca.csv            id,group,pc1,pc2                          (2n rows)
//   moments.csv        stat,before,after
//   pca_variance.csv   component,explained_variance
//   histogram.svg, pca.svg

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "eventaug/core.hpp"
#include "eventaug/embedding_io.hpp"
#include "eventaug/error.hpp"

namespace eventaug {

struct MomentReport {
  bool pooled = true;
  std::vector<double> mean_before, std_before;
  std::vector<double> mean_after, std_after;
  std::size_t count_before = 0;  // values per statistic
  std::size_t count_after = 0;
};

namespace detail {

inline void mean_std(std::span<const float> values, std::size_t stride, std::size_t offset,
                     double& mean, double& sd, std::size_t& count) {
  double sum = 0.0;
  count = 0;
  for (std::size_t i = offset; i < values.size(); i += stride, ++count) sum += values[i];
  mean = count ? sum / static_cast<double>(count) : 0.0;
  double ss = 0.0;
  for (std::size_t i = offset; i < values.size(); i += stride) {
    const double d = values[i] - mean;
    ss += d * d;
  }
  sd = count ? std::sqrt(ss / static_cast<double>(count)) : 0.0;
}

}  // namespace detail

/// Population mean and standard deviation before and after. Pooled mode
/// flattens every value into one sample; otherwise one entry per dimension.
inline MomentReport moments(const EmbeddingMatrix& before, const EmbeddingMatrix& after,
                            bool pooled) {
  if (before.rows() != after.rows() || before.dim() != after.dim()) {
    throw DimensionError("moments: shape mismatch");
  }
  MomentReport r;
  r.pooled = pooled;
  const std::size_t stride = pooled ? 1 : before.dim();
  const std::size_t stats = pooled ? 1 : before.dim();
  for (std::size_t k = 0; k < stats; ++k) {
    double m, s;
    detail::mean_std(before.data(), stride, k, m, s, r.count_before);
    r.mean_before.push_back(m);
    r.std_before.push_back(s);
    detail::mean_std(after.data(), stride, k, m, s, r.count_after);
    r.mean_after.push_back(m);
    r.std_after.push_back(s);
  }
  return r;
}

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<std::int64_t> counts;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;

  double bin_lo(std::size_t b) const {
    return lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(counts.size());
  }
  double bin_hi(std::size_t b) const { return bin_lo(b + 1); }
};

/// Equal-width bins over [lo, hi]. Bins are half-open [a, b) except the
/// last, which also takes hi. Values outside go to underflow/overflow.
template <typename T>
Histogram histogram(std::span<const T> values, std::size_t bins, double lo, double hi) {
  if (values.empty()) throw ValidationError("histogram: empty input");
  if (bins < 1) throw ValidationError("histogram: bins must be >= 1");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw ValidationError("histogram: range must be finite with hi > lo");
  }
  Histogram h{lo, hi, std::vector<std::int64_t>(bins, 0), 0, 0};
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (const T raw : values) {
    const double v = raw;
    if (v < lo) {
      ++h.underflow;
    } else if (v > hi) {
      ++h.overflow;
    } else {
      auto b = static_cast<std::size_t>((v - lo) * scale);
      h.counts[std::min(b, bins - 1)]++;
    }
  }
  return h;
}

struct Pca2 {
  std::vector<std::array<double, 2>> coords;  // n rows
  std::array<double, 2> explained_variance{0.0, 0.0};
  std::array<std::vector<double>, 2> components;
};

namespace detail {

inline std::vector<double> mat_vec(const std::vector<double>& m, const std::vector<double>& v) {
  const std::size_t d = v.size();
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += m[i * d + j] * v[j];
    out[i] = s;
  }
  return out;
}

inline double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

// Dominant eigenpair of the symmetric PSD matrix `c` by power iteration.
inline std::pair<double, std::vector<double>> power_iteration(const std::vector<double>& c,
                                                              std::size_t d) {
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += c[i * d + i];
  if (!(trace > 0.0)) return {0.0, std::vector<double>(d, 0.0)};

  std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
  auto cv = mat_vec(c, v);
  if (norm2(cv) <= 1e-12 * trace) {
    // All-ones start is (numerically) in the null space; restart from the
    // column with the largest norm.
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += c[i * d + j] * c[i * d + j];
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    if (best_norm <= 0.0) return {0.0, std::vector<double>(d, 0.0)};
    for (std::size_t i = 0; i < d; ++i) v[i] = c[i * d + best];
    const double n = norm2(v);
    for (auto& a : v) a /= n;
    cv = mat_vec(c, v);
  }
  for (int iter = 0; iter < 10000; ++iter) {
    const double n = norm2(cv);
    if (n <= 1e-300) return {0.0, std::vector<double>(d, 0.0)};
    std::vector<double> next(d);
    for (std::size_t i = 0; i < d; ++i) next[i] = cv[i] / n;
    double diff = 0.0;
    for (std::size_t i = 0; i < d; ++i) diff += (next[i] - v[i]) * (next[i] - v[i]);
    v = std::move(next);
    cv = mat_vec(c, v);
    if (std::sqrt(diff) < 1e-9) break;
  }
  double lambda = 0.0;
  for (std::size_t i = 0; i < d; ++i) lambda += v[i] * cv[i];
  return {std::max(lambda, 0.0), v};
}

inline void fix_sign(std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (!v.empty() && v[best] < 0.0) {
    for (auto& a : v) a = -a;
  }
}

}  // namespace detail

/// Projection onto the top two principal directions of the centered data.
///
/// Directions come from power iteration with deflation on the population
/// covariance (tolerance 1e-9, at most 10^4 iterations, all-ones start).
/// Each direction is signed so that its largest-magnitude loading is
/// positive. Explained variances are covariance eigenvalues.
inline Pca2 pca2(const EmbeddingMatrix& m) {
  if (m.rows() < 2) throw ValidationError("pca2: need at least 2 rows");
  const std::size_t n = m.rows(), d = m.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += m.at(i, k);
  }
  for (auto& a : mean) a /= static_cast<double>(n);
  std::vector<double> centered(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) centered[i * d + k] = m.at(i, k) - mean[k];
  }
  std::vector<double> cov(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = centered.data() + i * d;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) cov[a * d + b] += x[a] * x[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      cov[a * d + b] /= static_cast<double>(n);
      cov[b * d + a] = cov[a * d + b];
    }
  }

  Pca2 out;
  out.coords.assign(n, {0.0, 0.0});
  for (int comp = 0; comp < 2; ++comp) {
    auto [lambda, v] = detail::power_iteration(cov, d);
    detail::fix_sign(v);
    out.explained_variance[comp] = lambda;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) cov[a * d + b] -= lambda * v[a] * v[b];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += centered[i * d + k] * v[k];
      out.coords[i][comp] = s;
    }
    out.components[comp] = std::move(v);
  }
  return out;
}

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string histogram_svg(const Histogram& before, const Histogram& after) {
  const double w = 640, h = 360, pad = 40;
  std::int64_t peak = 1;
  for (auto c : before.counts) peak = std::max(peak, c);
  for (auto c : after.counts) peak = std::max(peak, c);
  const double bw = (w - 2 * pad) / static_cast<double>(before.counts.size());
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"360\" viewBox=\"0 0 640 360\">\n";
  s += "<title>Pooled value histogram before and after augmentation</title>\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"360\" fill=\"white\"/>\n";
  auto bars = [&](const Histogram& hist, const char* color, const char* name) {
    s += std::string("<g fill=\"") + color + "\" fill-opacity=\"0.5\" id=\"" + name + "\">\n";
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
      const double bh = (h - 2 * pad) * static_cast<double>(hist.counts[b]) / static_cast<double>(peak);
      s += "<rect x=\"" + fmt(pad + bw * static_cast<double>(b)) + "\" y=\"" + fmt(h - pad - bh) +
           "\" width=\"" + fmt(bw) + "\" height=\"" + fmt(bh) + "\"/>\n";
    }
    s += "</g>\n";
  };
  bars(before, "#1f77b4", "before");
  bars(after, "#d62728", "after");
  s += "<line x1=\"40\" y1=\"320\" x2=\"600\" y2=\"320\" stroke=\"black\"/>\n";
  s += "<text x=\"40\" y=\"340\" font-size=\"12\">" + fmt(before.lo) + "</text>\n";
  s += "<text x=\"600\" y=\"340\" font-size=\"12\" text-anchor=\"end\">" + fmt(before.hi) + "</text>\n";
  s += "<text x=\"50\" y=\"25\" font-size=\"12\" fill=\"#1f77b4\">before</text>\n";
  s += "<text x=\"110\" y=\"25\" font-size=\"12\" fill=\"#d62728\">after</text>\n";
  s += "</svg>\n";
  return s;
}

inline std::string pca_svg(const Pca2& p, std::size_t n_before) {
  const double w = 640, h = 640, pad = 40;
  double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& c : p.coords) {
    x0 = std::min(x0, c[0]);
    x1 = std::max(x1, c[0]);
    y0 = std::min(y0, c[1]);
    y1 = std::max(y1, c[1]);
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
  s += "<title>PCA projection before and after augmentation</title>\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"white\"/>\n";
  for (int group = 0; group < 2; ++group) {
    s += std::string("<g id=\"") + (group == 0 ? "before" : "after") + "\" fill=\"" +
         (group == 0 ? "#1f77b4" : "#d62728") + "\" fill-opacity=\"0.5\">\n";
    const std::size_t b = group == 0 ? 0 : n_before;
    const std::size_t e = group == 0 ? n_before : p.coords.size();
    for (std::size_t i = b; i < e; ++i) {
      const double cx = pad + (w - 2 * pad) * (p.coords[i][0] - x0) / (x1 - x0);
      const double cy = h - pad - (h - 2 * pad) * (p.coords[i][1] - y0) / (y1 - y0);
      s += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"2\"/>\n";
    }
    s += "</g>\n";
  }
  s += "<text x=\"320\" y=\"630\" font-size=\"12\" text-anchor=\"middle\">PC1</text>\n";
  s += "<text x=\"12\" y=\"320\" font-size=\"12\">PC2</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace detail

struct PlotFiles {
  std::vector<std::filesystem::path> csv;
  std::vector<std::filesystem::path> svg;
};

/// Writes histogram, PCA and moment CSVs plus two SVG renderings. PCA is
/// fitted on before and after stacked, so both groups share one basis.
inline PlotFiles export_plots(const EmbeddingMatrix& before, const EmbeddingMatrix& after,
                              const std::filesystem::path& out_dir, std::size_t bins = 100) {
  if (before.rows() != after.rows() || before.dim() != after.dim()) {
    throw DimensionError("export_plots: shape mismatch");
  }
  if (before.rows() == 0) throw ValidationError("export_plots: empty input");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());

  double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
  for (float v : before.data()) lo = std::min(lo, double{v}), hi = std::max(hi, double{v});
  for (float v : after.data()) lo = std::min(lo, double{v}), hi = std::max(hi, double{v});
  if (!(hi > lo)) hi = lo + 1.0;
  const auto hb = histogram(before.data(), bins, lo, hi);
  const auto ha = histogram(after.data(), bins, lo, hi);

  std::vector<float> stacked(before.data().begin(), before.data().end());
  stacked.insert(stacked.end(), after.data().begin(), after.data().end());
  std::vector<std::string> ids(before.ids());
  for (const auto& id : after.ids()) ids.push_back(id + "#after");
  const auto pca = pca2(EmbeddingMatrix(before.dim(), std::move(ids), std::move(stacked)));
  const auto mom = moments(before, after, /*pooled=*/true);

  PlotFiles files;
  auto write = [&](const char* name, const std::string& content, bool svg) {
    const auto path = out_dir / name;
    detail::write_file_bytes(path, content);
    (svg ? files.svg : files.csv).push_back(path);
  };

  std::string csv = "bin_lo,bin_hi,count_before,count_after\n";
  for (std::size_t b = 0; b < bins; ++b) {
    csv += detail::fmt(hb.bin_lo(b)) + "," + detail::fmt(hb.bin_hi(b)) + "," +
           std::to_string(hb.counts[b]) + "," + std::to_string(ha.counts[b]) + "\n";
  }
  write("histogram.csv", csv, false);

  csv = "id,group,pc1,pc2\n";
  for (std::size_t i = 0; i < pca.coords.size(); ++i) {
    const bool is_before = i < before.rows();
    const auto& id = is_before ? before.ids()[i] : after.ids()[i - before.rows()];
    csv += id + "," + (is_before ? "before" : "after") + "," + detail::fmt(pca.coords[i][0]) + "," +
           detail::fmt(pca.coords[i][1]) + "\n";
  }
  write("pca.csv", csv, false);

  csv = "stat,before,after\n";
  csv += "mean," + detail::fmt(mom.mean_before[0]) + "," + detail::fmt(mom.mean_after[0]) + "\n";
  csv += "std," + detail::fmt(mom.std_before[0]) + "," + detail::fmt(mom.std_after[0]) + "\n";
  csv += "count," + std::to_string(mom.count_before) + "," + std::to_string(mom.count_after) + "\n";
  write("moments.csv", csv, false);

  csv = "component,explained_variance\n";
  csv += "1," + detail::fmt(pca.explained_variance[0]) + "\n";
  csv += "2," + detail::fmt(pca.explained_variance[1]) + "\n";
  write("pca_variance.csv", csv, false);

  write("histogram.svg", detail::histogram_svg(hb, ha), true);
  write("pca.svg", detail::pca_svg(pca, before.rows()), true);
  return files;
}

}  // namespace eventaug
