#pragma once

// Exact conditional-independence reasoning on finite joint tables of
// (X, Y): the set S, its dense-subset analogue S_D, and brute-force
// Markov-boundary enumeration.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcp/errors.hpp"

namespace bcp {

struct Atom {
  std::vector<long long> x;
  long long y = 0;
  double prob = 0.0;
};

struct JointTable {
  int p = 0;
  std::vector<Atom> atoms;
  std::optional<long long> total;  // every x sums to this when set (1 for one-hot)

  void validate() const {
    if (p < 1) throw ParameterError("table dimension must be positive");
    double mass = 0.0;
    for (const Atom& a : atoms) {
      if (static_cast<int>(a.x.size()) != p) throw ParameterError("atom has the wrong dimension");
      if (!(a.prob >= 0.0) || !std::isfinite(a.prob)) throw ParameterError("atom probabilities must be nonnegative");
      if (total) {
        long long s = 0;
        for (long long v : a.x) s += v;
        if (s != *total) throw DomainError("atom violates the declared sum constraint");
      }
      mass += a.prob;
    }
    if (std::abs(mass - 1.0) > 1e-12) throw ParameterError("atom probabilities must sum to 1");
  }
};

namespace detail {

constexpr double tv_tolerance = 1e-10;

inline std::uint32_t mask_of(const IndexSet& s, int p) {
  std::uint32_t m = 0;
  for (int k : s) {
    if (k < 0 || k >= p) throw ParameterError("index out of range");
    m |= 1u << k;
  }
  return m;
}

inline IndexSet set_of(std::uint32_t m, int p) {
  IndexSet s;
  for (int k = 0; k < p; ++k)
    if (m & (1u << k)) s.push_back(k);
  return s;
}

// Y independent of X_A given X_{A^c}; A may be empty or everything.
inline bool ci_holds(const JointTable& t, std::uint32_t a_mask) {
  std::vector<long long> ys;
  for (const Atom& at : t.atoms) ys.push_back(at.y);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  auto y_index = [&](long long y) { return static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y) - ys.begin()); };

  // rest value -> (A value -> unnormalized law of Y)
  std::map<std::vector<long long>, std::map<std::vector<long long>, std::vector<double>>> groups;
  for (const Atom& at : t.atoms) {
    if (at.prob <= 0.0) continue;
    std::vector<long long> rest, in;
    for (int k = 0; k < t.p; ++k) (a_mask & (1u << k) ? in : rest).push_back(at.x[static_cast<std::size_t>(k)]);
    auto& law = groups[rest][in];
    if (law.empty()) law.assign(ys.size(), 0.0);
    law[y_index(at.y)] += at.prob;
  }
  for (auto& [rest, by_a] : groups) {
    std::vector<double> ref;
    for (auto& [a_val, law] : by_a) {
      double mass = 0.0;
      for (double v : law) mass += v;
      for (double& v : law) v /= mass;
      if (ref.empty()) {
        ref = law;
        continue;
      }
      double tv = 0.0;
      for (std::size_t k = 0; k < law.size(); ++k) tv += std::abs(law[k] - ref[k]);
      if (0.5 * tv > tv_tolerance) return false;
    }
  }
  return true;
}

// Support of X split by the values of X_{C^c}, C = A | B; within every
// slice the points must form one class under "equal on A \\ B or equal on
// B \\ A".
inline bool single_equivalence_class(const JointTable& t, std::uint32_t a, std::uint32_t b) {
  const std::uint32_t c = a | b, a_only = a & ~b, b_only = b & ~a;
  std::map<std::vector<long long>, std::vector<std::vector<long long>>> slices;
  for (const Atom& at : t.atoms) {
    if (at.prob <= 0.0) continue;
    std::vector<long long> rest;
    for (int k = 0; k < t.p; ++k)
      if (!(c & (1u << k))) rest.push_back(at.x[static_cast<std::size_t>(k)]);
    auto& pts = slices[rest];
    if (std::find(pts.begin(), pts.end(), at.x) == pts.end()) pts.push_back(at.x);
  }
  auto agree = [&](const std::vector<long long>& u, const std::vector<long long>& v, std::uint32_t m) {
    for (int k = 0; k < t.p; ++k)
      if ((m & (1u << k)) && u[static_cast<std::size_t>(k)] != v[static_cast<std::size_t>(k)]) return false;
    return true;
  };
  for (const auto& [rest, pts] : slices) {
    std::vector<char> reached(pts.size(), 0);
    std::vector<std::size_t> stack{0};
    reached[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < pts.size(); ++v)
        if (!reached[v] && (agree(pts[u], pts[v], a_only) || agree(pts[u], pts[v], b_only))) {
          reached[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    if (count != pts.size()) return false;
  }
  return true;
}

// S^c reachable from the true bivariate nulls by repeated unions of pairs
// with a single equivalence class.
inline bool complement_reachable(const JointTable& t, std::uint32_t s_mask) {
  const std::uint32_t full = (1u << t.p) - 1u, target = full & ~s_mask;
  if (target == 0) return true;
  std::vector<std::uint32_t> q;
  for (int i = 0; i < t.p; ++i)
    for (int j = i + 1; j < t.p; ++j)
      if (ci_holds(t, (1u << i) | (1u << j))) q.push_back((1u << i) | (1u << j));
  std::vector<char> in_q(static_cast<std::size_t>(full) + 1, 0);
  for (auto m : q) in_q[m] = 1;
  std::map<std::pair<std::uint32_t, std::uint32_t>, bool> delta;
  for (bool grew = true; grew && !in_q[target];) {
    grew = false;
    const std::size_t n = q.size();
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = u + 1; v < n; ++v) {
        const std::uint32_t un = q[u] | q[v];
        if (in_q[un]) continue;
        const auto key = std::minmax(q[u], q[v]);
        auto it = delta.find(key);
        if (it == delta.end()) it = delta.emplace(key, single_equivalence_class(t, q[u], q[v])).first;
        if (!it->second) continue;
        in_q[un] = 1;
        q.push_back(un);
        grew = true;
      }
  }
  return in_q[target];
}

}  // namespace detail

/// Y independent of X_A given X_{A^c}, for nonempty proper A.
inline bool is_ci(const JointTable& t, const IndexSet& A) {
  t.validate();
  const std::uint32_t m = detail::mask_of(A, t.p);
  if (m == 0) throw ParameterError("A must be nonempty");
  if (std::popcount(m) == t.p) throw ParameterError("A must be a proper subset");
  return detail::ci_holds(t, m);
}

/// { j : H_{i,j} false for every i != j }.
inline IndexSet compute_S(const JointTable& t) {
  t.validate();
  if (t.p < 3) throw ParameterError("S needs p >= 3");
  IndexSet s;
  for (int j = 0; j < t.p; ++j) {
    bool all_false = true;
    for (int i = 0; i < t.p && all_false; ++i)
      if (i != j && detail::ci_holds(t, (1u << i) | (1u << j))) all_false = false;
    if (all_false) s.push_back(j);
  }
  return s;
}

struct BoundaryReport {
  std::vector<IndexSet> boundaries;
  std::vector<bool> trivial;  // |M| >= p - 1
  std::vector<IndexSet> nontrivial;
  bool unique_nontrivial = false;
  IndexSet S;
  // Unique nontrivial boundary equals S, or none exists and S = [p].
  bool equals_S = false;
  // Every boundary with |M| < p - 1 contains S.
  bool contains_S = true;
  // S = [p], or S^c is reachable from the true bivariate nulls through the
  // intersection property; either makes S the answer.
  bool reachable = false;
};

/// All minimal M with Y independent of X_{M^c} given X_M, by a full
/// subset scan.
inline BoundaryReport enumerate_markov_boundaries(const JointTable& t) {
  t.validate();
  if (t.p > 16) throw ParameterError("boundary enumeration scans 2^p subsets; refusing p > 16");
  if (t.p < 3) throw ParameterError("boundary enumeration needs p >= 3");
  const std::uint32_t full = (1u << t.p) - 1u;
  std::vector<char> blanket(static_cast<std::size_t>(full) + 1, 0);
  for (std::uint32_t m = 0; m <= full; ++m) blanket[m] = m == full || detail::ci_holds(t, full & ~m);

  BoundaryReport rep;
  rep.S = compute_S(t);
  const std::uint32_t s_mask = detail::mask_of(rep.S, t.p);
  for (std::uint32_t m = 0; m <= full; ++m) {
    if (!blanket[m]) continue;
    bool minimal = true;
    for (std::uint32_t sub = (m - 1) & m;; sub = (sub - 1) & m) {
      if (sub != m && blanket[sub]) {
        minimal = false;
        break;
      }
      if (sub == 0) break;
    }
    if (!minimal) continue;
    const IndexSet set = detail::set_of(m, t.p);
    const bool triv = static_cast<int>(set.size()) >= t.p - 1;
    rep.boundaries.push_back(set);
    rep.trivial.push_back(triv);
    if (!triv) {
      rep.nontrivial.push_back(set);
      if ((m & s_mask) != s_mask) rep.contains_S = false;
    }
  }
  rep.unique_nontrivial = rep.nontrivial.size() == 1;
  rep.reachable = detail::complement_reachable(t, s_mask);
  rep.equals_S = (rep.unique_nontrivial && rep.nontrivial.front() == rep.S) ||
                 (rep.nontrivial.empty() && static_cast<int>(rep.S.size()) == t.p);
  return rep;
}

struct DenseReport {
  IndexSet S_D;
  IndexSet S_cap_D;
  // S = [p], or |S^c ∩ D| != 1 with S^c reachable from the true bivariate nulls.
  bool conditions_hold = false;
  bool matches = false;          // S_D == S ∩ D
};

/// { j in D : H_{i,j} false for every i in D \ {j} }, with the check
/// against S ∩ D.
inline DenseReport compute_S_D(const JointTable& t, const IndexSet& dense) {
  t.validate();
  if (dense.size() < 2) throw ParameterError("the dense set needs at least two covariates");
  IndexSet D = dense;
  std::sort(D.begin(), D.end());
  if (std::adjacent_find(D.begin(), D.end()) != D.end()) throw ParameterError("duplicate index in dense set");
  detail::mask_of(D, t.p);

  DenseReport rep;
  for (int j : D) {
    bool all_false = true;
    for (int i : D)
      if (i != j && detail::ci_holds(t, (1u << i) | (1u << j))) {
        all_false = false;
        break;
      }
    if (all_false) rep.S_D.push_back(j);
  }
  const IndexSet S = t.p >= 3 ? compute_S(t) : IndexSet{};
  std::set_intersection(S.begin(), S.end(), D.begin(), D.end(), std::back_inserter(rep.S_cap_D));
  const bool everything = static_cast<int>(S.size()) == t.p;
  rep.conditions_hold =
      everything || (D.size() - rep.S_cap_D.size() != 1 && detail::complement_reachable(t, detail::mask_of(S, t.p)));
  rep.matches = rep.S_D == rep.S_cap_D;
  return rep;
}

}  // namespace bcp
