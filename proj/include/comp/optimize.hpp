#pragma once

// Rate and cooperating-set optimization on top of the closed-form outage.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comp/analytic.hpp"

namespace comp {

/// The goodput objective is zero over the whole search interval.
class SearchBoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No SINR threshold below the search cap reaches the requested outage.
class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Goodput search: a log-spaced grid, then golden-section refinement
/// around the best grid point.
struct SearchBounds {
  double gamma_lo = 1e-4;
  double gamma_hi = 1e6;
  std::size_t grid_points = 256;
  double relative_tolerance = 1e-6;  // final bracket width, relative in gamma

  void validate() const;
};

struct RateOptimum {
  double gamma_star = 0.0;
  double rate_star = 0.0;  // log2(1 + gamma_star), bit/s/Hz
  double goodput = 0.0;    // rate_star * (1 - outage_at_optimum)
  double outage_at_optimum = 0.0;
  bool saturated = false;  // outage identically zero; gamma_star is the upper bound
  ConditioningReport report;
};

/// max over gamma of log2(1 + gamma) (1 - P_out(gamma)) within the bounds.
RateOptimum maximize_goodput(const OutageModel& model, const SearchBounds& bounds = {});
RateOptimum maximize_goodput(const LinkQuery& link, const SearchBounds& bounds = {},
                             const ConditioningPolicy& policy = {});

struct FixedOutageCapacity {
  double gamma_o = 0.0;
  double capacity = 0.0;  // log2(1 + gamma_o) (1 - p_o)
  double outage = 0.0;    // P_out(gamma_o)
  ConditioningReport report;
};

/// Solves P_out(gamma_o) = p_o by bisection (|P_out(gamma_o) - p_o| <= 1e-6
/// whenever the closed form is used).
FixedOutageCapacity capacity_at_fixed_outage(const OutageModel& model, double p_o,
                                             double gamma_cap = 1e12);
FixedOutageCapacity capacity_at_fixed_outage(const LinkQuery& link, double p_o,
                                             const ConditioningPolicy& policy = {},
                                             double gamma_cap = 1e12);

struct SelectionCriterion {
  enum class Kind { goodput, fixed_outage };
  Kind kind = Kind::goodput;
  double outage_target = 0.0;  // fixed_outage only

  static SelectionCriterion goodput() { return {Kind::goodput, 0.0}; }
  static SelectionCriterion fixed_outage(double p_o) { return {Kind::fixed_outage, p_o}; }
  std::string label() const;
};

struct CandidateScore {
  std::size_t set_size = 0;
  double goodput = 0.0;              // G of the K strongest stations
  double spectral_efficiency = 0.0;  // G / K
  double gamma = 0.0;                // gamma* or gamma_o
  double outage = 0.0;
  bool saturated = false;
  ConditioningReport report;
};

struct SetSelection {
  std::vector<std::size_t> chosen_set;  // indices into the candidate list
  std::size_t set_size = 0;
  double goodput = 0.0;
  double per_bs_spectral_efficiency = 0.0;
  std::vector<CandidateScore> per_candidate_scores;  // K = 1..n_max
};

/// Evaluates the nested sets of the K strongest stations, K = 1..n_max (all
/// others interfere), and keeps the one with the best G/K. Ties within 1e-12
/// relative go to the smaller set.
SetSelection select_best_set(std::span<const double> candidate_powers_desc, std::size_t n_max,
                             const SelectionCriterion& criterion, double noise_power = 0.0,
                             const SearchBounds& bounds = {},
                             const ConditioningPolicy& policy = {});

/// Same selection over prebuilt models; candidates[k - 1] must serve the k
/// strongest stations.
SetSelection select_best_set(std::span<const OutageModel> candidates,
                             const SelectionCriterion& criterion, const SearchBounds& bounds = {});

/// Score of a single candidate set under a criterion.
CandidateScore score_candidate(const OutageModel& model, const SelectionCriterion& criterion,
                               const SearchBounds& bounds = {});

}  // namespace comp
