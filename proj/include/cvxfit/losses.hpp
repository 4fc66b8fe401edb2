// Copyright 2026 The CvxFit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvxfit/core.hpp"
#include "cvxfit/params.hpp"
#include "cvxfit/sample_set.hpp"

namespace cvxfit {

struct LossWeights {
  double w_approx = 1.0;
  double w_decomp = 0.1;
  double w_unique = 0.001;
  double w_guide = 0.01;
  double w_loc = 1.0;
  double tau = 2.0;                 // overlap threshold
  double near_surface_scale = 0.1;  // approx-loss down-weight for surface samples
  int n_guide = 32;                 // interior samples each convex must explain
  bool use_merged = false;          // single relu(Phi)^2 loss instead of guide+loc
};

struct LossTerms {
  double approx = 0.0;
  double decomp = 0.0;
  double unique = 0.0;
  double guide = 0.0;
  double loc = 0.0;
  double merged = 0.0;
  double total = 0.0;
};

namespace detail {

// Forward pass of one element at one point, with everything the chain rule
// needs to push a d(loss)/d(Phi) value back onto the flat parameter vector.
template <int D>
struct ElementScratch {
  Vec<D> x_local;
  std::vector<double> sdist;      // H_h
  std::vector<double> softmax;    // w_h = exp(delta*(H_h - max)) / sum
  std::vector<Vec<D>> unit_n;
  std::vector<double> inv_raw_norm;
  double phi = 0.0;
  double c = 0.0;

  void resize(int h_count) {
    sdist.resize(h_count);
    softmax.resize(h_count);
    unit_n.resize(h_count);
    inv_raw_norm.resize(h_count);
  }
};

template <int D>
void forward_element(const ConvexElement<D>& e, const Vec<D>& x_world,
                     double sigma, bool normalized, ElementScratch<D>* s) {
  const int h_count = e.num_planes();
  s->resize(h_count);
  s->x_local = x_world + e.translation;
  double mx = -std::numeric_limits<double>::infinity();
  for (int h = 0; h < h_count; ++h) {
    const double raw_norm = e.planes[h].normal_raw.norm();
    s->inv_raw_norm[h] = 1.0 / raw_norm;
    s->unit_n[h] = e.planes[h].normal_raw * s->inv_raw_norm[h];
    s->sdist[h] = s->unit_n[h].dot(s->x_local) + e.planes[h].offset;
    mx = std::max(mx, s->sdist[h]);
  }
  double sum = 0.0;
  for (int h = 0; h < h_count; ++h) {
    s->softmax[h] = std::exp(e.delta * (s->sdist[h] - mx));
    sum += s->softmax[h];
  }
  const double inv_sum = 1.0 / sum;
  for (int h = 0; h < h_count; ++h) s->softmax[h] *= inv_sum;
  const double lse = std::log(sum);
  s->phi = normalized ? mx + lse / e.delta : e.delta * mx + lse;
  s->c = sigmoid(-sigma * s->phi);
}

// Accumulates dphi * dPhi/d(params of element k) into grad.
template <int D>
void backward_element(const ConvexElement<D>& e, const ParamLayout<D>& layout,
                      int k, const ElementScratch<D>& s, bool normalized,
                      double dphi, ParamVector* grad) {
  const int h_count = e.num_planes();
  double weighted_dist = 0.0;
  for (int h = 0; h < h_count; ++h) weighted_dist += s.softmax[h] * s.sdist[h];

  // d Phi / d delta
  const double dphi_ddelta =
      normalized ? (weighted_dist - s.phi) / e.delta : weighted_dist;
  (*grad)[layout.delta_offset(k)] += dphi * dphi_ddelta;

  auto gc = grad->template segment<D>(layout.translation_offset(k));
  for (int h = 0; h < h_count; ++h) {
    // d Phi / d H_h
    const double dH = normalized ? s.softmax[h] : e.delta * s.softmax[h];
    const double g = dphi * dH;
    const int off = layout.plane_offset(k, h);
    (*grad)[off + D] += g;           // offset d_h
    gc += g * s.unit_n[h];           // translation (x_local = x + c)
    // raw normal through normalization: (x_local - n (n.x_local)) / |raw|
    const Vec<D> dn =
        (s.x_local - s.unit_n[h] * s.unit_n[h].dot(s.x_local)) *
        s.inv_raw_norm[h];
    grad->template segment<D>(off) += g * dn;
  }
}

inline double dC_to_dPhi(double c, double sigma, double dc) {
  return dc * (-sigma * c * (1.0 - c));
}

// Interior-sample indices ordered by (Phi_k, lexicographic coordinates) so the
// selection is invariant under permutations of the sample set.
template <int D>
std::vector<int> ranked_interior(const std::vector<double>& phi,
                                 const SampleSet<D>& interior) {
  std::vector<int> idx(interior.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (phi[a] != phi[b]) return phi[a] < phi[b];
    const auto& pa = interior.points[a];
    const auto& pb = interior.points[b];
    for (int i = 0; i < D; ++i) {
      if (pa[i] != pb[i]) return pa[i] < pb[i];
    }
    return a < b;
  });
  return idx;
}

inline void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string("non-finite loss term: ") + term);
  }
}

}  // namespace detail

/// Reconstruction loss: mean of weight * (O^(x) - O(x))^2, with the
/// near-surface down-weight applied when the set is tagged near-surface.
template <int D>
double loss_approx(const Decomposition<D>& dec, const SampleSet<D>& s,
                   double near_surface_scale = 0.1) {
  if (s.empty()) throw std::invalid_argument("loss_approx: empty sample set");
  const double w =
      s.source == SampleSource::kNearSurface ? near_surface_scale : 1.0;
  double acc = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const double r = union_indicator(dec, s.points[i]) - s.labels[i];
    acc += w * r * r;
  }
  return acc / s.size();
}

/// Overlap penalty: mean of relu(sum_k C_k(x) - tau)^2.
template <int D>
double loss_decomp(const Decomposition<D>& dec, const SampleSet<D>& s,
                   double tau = 2.0) {
  if (s.empty()) throw std::invalid_argument("loss_decomp: empty sample set");
  double acc = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    double sum = 0.0;
    for (const auto& e : dec.elements) {
      sum += indicator(e, s.points[i], dec.sigma, dec.normalized_logsumexp);
    }
    const double r = sum - tau;
    if (r > 0.0) acc += r * r;
  }
  return acc / s.size();
}

/// Offset-magnitude regularizer, averaged over planes and elements.
template <int D>
double loss_unique(const Decomposition<D>& dec) {
  double acc = 0.0;
  for (const auto& e : dec.elements) {
    double per = 0.0;
    for (const auto& p : e.planes) per += p.offset * p.offset;
    acc += per / e.num_planes();
  }
  return acc / dec.num_elements();
}

/// Each convex must explain its n_guide nearest interior samples:
/// (1/K) sum_k (1/N) sum_{x in N_k} (C_k(x) - 1)^2.
template <int D>
double loss_guide(const Decomposition<D>& dec, const SampleSet<D>& interior,
                  int n_guide) {
  if (interior.size() < n_guide) {
    throw std::invalid_argument("loss_guide: fewer interior samples than N");
  }
  double acc = 0.0;
  for (const auto& e : dec.elements) {
    std::vector<double> phi(interior.size());
    for (int i = 0; i < interior.size(); ++i) {
      phi[i] = smooth_sdf(e, interior.points[i], dec.normalized_logsumexp);
    }
    const auto idx = detail::ranked_interior<D>(phi, interior);
    double per = 0.0;
    for (int j = 0; j < n_guide; ++j) {
      const double c = sigmoid(-dec.sigma * phi[idx[j]]);
      per += (c - 1.0) * (c - 1.0);
    }
    acc += per / n_guide;
  }
  return acc / dec.num_elements();
}

/// Pulls each translation toward the interior sample nearest to the convex:
/// (1/K) sum_k ||c_k - x*_k||^2.
template <int D>
double loss_loc(const Decomposition<D>& dec, const SampleSet<D>& interior) {
  if (interior.empty()) throw std::invalid_argument("loss_loc: empty interior");
  double acc = 0.0;
  for (const auto& e : dec.elements) {
    std::vector<double> phi(interior.size());
    for (int i = 0; i < interior.size(); ++i) {
      phi[i] = smooth_sdf(e, interior.points[i], dec.normalized_logsumexp);
    }
    const auto idx = detail::ranked_interior<D>(phi, interior);
    acc += (e.translation - interior.points[idx[0]]).squaredNorm();
  }
  return acc / dec.num_elements();
}

/// Merged alternative to guide+loc: (1/K) sum_k (1/N) sum relu(Phi_k)^2 over
/// the N nearest interior samples.
template <int D>
double loss_merged(const Decomposition<D>& dec, const SampleSet<D>& interior,
                   int n_guide) {
  if (interior.size() < n_guide) {
    throw std::invalid_argument("loss_merged: fewer interior samples than N");
  }
  double acc = 0.0;
  for (const auto& e : dec.elements) {
    std::vector<double> phi(interior.size());
    for (int i = 0; i < interior.size(); ++i) {
      phi[i] = smooth_sdf(e, interior.points[i], dec.normalized_logsumexp);
    }
    const auto idx = detail::ranked_interior<D>(phi, interior);
    double per = 0.0;
    for (int j = 0; j < n_guide; ++j) {
      const double p = phi[idx[j]];
      if (p > 0.0) per += p * p;
    }
    acc += per / n_guide;
  }
  return acc / dec.num_elements();
}

/// Least-squares translation x0 minimizing sum_h (d_h + n_h . x0)^2, i.e. the
/// offset-centering translation with minimum-norm handling of rank deficiency.
template <int D>
Vec<D> center_offsets_closed_form(const std::vector<Hyperplane<D>>& planes) {
  Eigen::MatrixXd n_mat(planes.size(), D);
  Eigen::VectorXd d(planes.size());
  for (size_t h = 0; h < planes.size(); ++h) {
    n_mat.row(h) = planes[h].unit_normal().transpose();
    d[h] = planes[h].offset;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      n_mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(-d);
}

/// Weighted total of all enabled losses and its exact analytic gradient with
/// respect to the flat parameter vector.
///
/// The expectation losses pool the volume and surface batches into one mean;
/// the near-surface down-weight applies to the approximation term only. The
/// interior set for the guidance-type losses is interior_bank when given,
/// otherwise the label-1 subset of the volume batch. Nearest-sample
/// selections are constants within the step.
template <int D>
LossTerms total_loss_and_grad(const Decomposition<D>& dec,
                              const SampleSet<D>& s_volume,
                              const SampleSet<D>& s_surface,
                              const LossWeights& w, ParamVector* grad,
                              const SampleSet<D>* interior_bank = nullptr) {
  if (s_volume.empty()) {
    throw std::invalid_argument("total_loss: empty volume sample set");
  }
  const auto layout = ParamLayout<D>::of(dec);
  const int k_count = layout.num_elements;
  const bool normalized = dec.normalized_logsumexp;
  const double sigma = dec.sigma;
  grad->setZero(layout.size());

  LossTerms terms;
  const int n_pool = s_volume.size() + s_surface.size();

  std::vector<detail::ElementScratch<D>> scratch(k_count);
  std::vector<double> dc(k_count);

  const bool need_guide =
      !w.use_merged && (w.w_guide != 0.0 || w.w_loc != 0.0);
  const bool need_merged = w.use_merged;
  SampleSet<D> interior;
  if (need_guide || need_merged) {
    interior = interior_bank ? *interior_bank : interior_subset(s_volume);
  }

  // Pooled pass: approx + decomp, value and gradient per sample.
  auto pooled_sample = [&](const Vec<D>& x, double label, double approx_w) {
    double c_sum = 0.0;
    double c_max = 0.0;
    int k_max = 0;
    for (int k = 0; k < k_count; ++k) {
      detail::forward_element(dec.elements[k], x, sigma, normalized,
                              &scratch[k]);
      c_sum += scratch[k].c;
      if (scratch[k].c > c_max) {
        c_max = scratch[k].c;
        k_max = k;
      }
      dc[k] = 0.0;
    }
    const double r_approx = c_max - label;
    terms.approx += approx_w * r_approx * r_approx;
    // gradient flows to the argmax element only
    dc[k_max] += w.w_approx * approx_w * 2.0 * r_approx / n_pool;

    const double r_decomp = c_sum - w.tau;
    if (r_decomp > 0.0) {
      terms.decomp += r_decomp * r_decomp;
      for (int k = 0; k < k_count; ++k) {
        dc[k] += w.w_decomp * 2.0 * r_decomp / n_pool;
      }
    }
    for (int k = 0; k < k_count; ++k) {
      if (dc[k] != 0.0) {
        const double dphi = detail::dC_to_dPhi(scratch[k].c, sigma, dc[k]);
        detail::backward_element(dec.elements[k], layout, k, scratch[k],
                                 normalized, dphi, grad);
      }
    }
  };
  for (int i = 0; i < s_volume.size(); ++i) {
    pooled_sample(s_volume.points[i], s_volume.labels[i], 1.0);
  }
  for (int i = 0; i < s_surface.size(); ++i) {
    pooled_sample(s_surface.points[i], s_surface.labels[i],
                  w.near_surface_scale);
  }
  terms.approx /= n_pool;
  terms.decomp /= n_pool;
  detail::check_finite(terms.approx, "approx");
  detail::check_finite(terms.decomp, "decomp");

  // Unique parameterization loss.
  for (int k = 0; k < k_count; ++k) {
    const auto& e = dec.elements[k];
    double per = 0.0;
    for (int h = 0; h < e.num_planes(); ++h) {
      const double d_h = e.planes[h].offset;
      per += d_h * d_h;
      (*grad)[layout.plane_offset(k, h) + D] +=
          w.w_unique * 2.0 * d_h / (k_count * e.num_planes());
    }
    terms.unique += per / e.num_planes();
  }
  terms.unique /= k_count;
  detail::check_finite(terms.unique, "unique");

  // Guidance-type losses over the interior subset.
  if (need_guide || need_merged) {
    const int n_sel = w.n_guide;
    const int required =
        (need_merged || w.w_guide != 0.0) ? std::max(1, n_sel) : 1;
    if (interior.size() < required) {
      throw std::invalid_argument(
          "total_loss: fewer interior samples than N_guide");
    }
    std::vector<double> phi(interior.size());
    for (int k = 0; k < k_count; ++k) {
      const auto& e = dec.elements[k];
      for (int i = 0; i < interior.size(); ++i) {
        phi[i] = smooth_sdf(e, interior.points[i], normalized);
      }
      const auto idx = detail::ranked_interior<D>(phi, interior);
      if (need_merged) {
        double per = 0.0;
        for (int j = 0; j < n_sel; ++j) {
          const Vec<D>& x = interior.points[idx[j]];
          const double p = phi[idx[j]];
          if (p > 0.0) {
            per += p * p;
            detail::forward_element(e, x, sigma, normalized, &scratch[0]);
            detail::backward_element(e, layout, k, scratch[0], normalized,
                                     w.w_loc * 2.0 * p / (k_count * n_sel),
                                     grad);
          }
        }
        terms.merged += per / n_sel;
      } else {
        if (w.w_guide != 0.0) {
          double per = 0.0;
          for (int j = 0; j < n_sel; ++j) {
            const Vec<D>& x = interior.points[idx[j]];
            detail::forward_element(e, x, sigma, normalized, &scratch[0]);
            const double c = scratch[0].c;
            per += (c - 1.0) * (c - 1.0);
            const double dcv = w.w_guide * 2.0 * (c - 1.0) / (k_count * n_sel);
            detail::backward_element(e, layout, k, scratch[0], normalized,
                                     detail::dC_to_dPhi(c, sigma, dcv), grad);
          }
          terms.guide += per / n_sel;
        }
        if (w.w_loc != 0.0) {
          const Vec<D>& nearest = interior.points[idx[0]];
          const Vec<D> diff = e.translation - nearest;
          terms.loc += diff.squaredNorm();
          grad->template segment<D>(layout.translation_offset(k)) +=
              w.w_loc * 2.0 / k_count * diff;
        }
      }
    }
    terms.guide /= k_count;
    terms.loc /= k_count;
    terms.merged /= k_count;
    detail::check_finite(terms.guide, "guide");
    detail::check_finite(terms.loc, "loc");
    detail::check_finite(terms.merged, "merged");
  }

  terms.total = w.w_approx * terms.approx + w.w_decomp * terms.decomp +
                w.w_unique * terms.unique;
  if (w.use_merged) {
    terms.total += w.w_loc * terms.merged;
  } else {
    terms.total += w.w_guide * terms.guide + w.w_loc * terms.loc;
  }
  detail::check_finite(terms.total, "total");
  if (!grad->allFinite()) {
    throw std::runtime_error("non-finite gradient");
  }
  return terms;
}

}  // namespace cvxfit
