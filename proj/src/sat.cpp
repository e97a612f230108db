#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <limits>

#include <omp.h>

#include "logic_internal.hpp"
#include "oucl/errors.hpp"
#include "oucl/logic.hpp"

namespace oucl {

namespace {

using detail::Compiled;

// Minimal predecessor sets S (bitmask over positions 0..k-1) such that the
// fixed rows are a function of the S-projection.
std::vector<std::uint64_t> minimal_supports(const std::vector<std::int8_t>& rows, int k) {
  std::vector<std::uint64_t> subsets(std::size_t{1} << k);
  for (std::uint64_t s = 0; s < subsets.size(); ++s) subsets[s] = s;
  std::stable_sort(subsets.begin(), subsets.end(),
                   [](std::uint64_t a, std::uint64_t b) { return std::popcount(a) < std::popcount(b); });
  std::vector<std::uint64_t> out;
  for (std::uint64_t s : subsets) {
    bool super = false;
    for (auto m : out) super = super || (s & m) == m;
    if (super) continue;
    // S as a mask over row bits (position q is bit k-1-q)
    std::uint64_t rmask = 0;
    for (int q = 0; q < k; ++q)
      if ((s >> q) & 1) rmask |= std::uint64_t{1} << (k - 1 - q);
    std::vector<std::int8_t> proj(rows.size(), -1);
    bool ok = true;
    for (std::uint64_t r = 0; r < rows.size() && ok; ++r) {
      if (rows[r] < 0) continue;
      auto& p = proj[r & rmask];
      if (p >= 0 && p != rows[r]) ok = false;
      p = rows[r];
    }
    if (ok) out.push_back(s);
  }
  return out;
}

// The completion that reads only the S-projection (unconstrained cells 0).
std::vector<bool> projection_fill(const std::vector<std::int8_t>& rows, int k, std::uint64_t s) {
  std::uint64_t rmask = 0;
  for (int q = 0; q < k; ++q)
    if ((s >> q) & 1) rmask |= std::uint64_t{1} << (k - 1 - q);
  std::vector<std::int8_t> proj(rows.size(), 0);
  for (std::uint64_t r = 0; r < rows.size(); ++r)
    if (rows[r] >= 0) proj[r & rmask] = rows[r];
  std::vector<bool> out(rows.size());
  for (std::uint64_t r = 0; r < rows.size(); ++r) out[r] = proj[r & rmask] != 0;
  return out;
}

class Search {
 public:
  Search(const Compiled& c, System sys, const std::atomic<int>* best, int task)
      : C(c), sys_(sys), n_(static_cast<int>(c.vars.size())), na_(static_cast<int>(c.ants.size())),
        best_(best), task_(task) {
    pos_.assign(n_, -1);
    T_.assign(na_, std::vector<std::int8_t>(n_, -1));
  }

  // Runs the subtree whose first variable is `first` (or everything for n = 0).
  bool run(int first) {
    if (n_ == 0) return leaf();
    return place(0, first);
  }

  std::optional<SatCertificate> cert;
  SatStats stats;

 private:
  bool cancelled() const { return best_ && best_->load(std::memory_order_relaxed) < task_; }

  Tri atom3(int i) const {
    const auto& at = C.atoms[i];
    if (at.influence) {
      int ps = pos_[at.src], pt = pos_[at.tgt];
      if (pt >= 0 && (ps < 0 || ps > pt)) return Tri::False;
      return Tri::Unknown;
    }
    const auto& row = T_[at.ant];
    return evaluate3(at.cons, [&](int x) { return row[x] < 0 ? Tri::Unknown : tri(row[x] != 0); });
  }
  Tri skeleton3() const {
    return evaluate3(C.skeleton, [&](int i) { return atom3(i); });
  }

  bool dfs(int depth) {
    if (cancelled()) return false;
    if (depth == n_) return leaf();
    for (int x = 0; x < n_; ++x)
      if (pos_[x] < 0 && place(depth, x)) return true;
    return false;
  }

  bool place(int depth, int x) {
    ++stats.nodes;
    order_.push_back(x);
    pos_[x] = depth;
    // effectiveness first, then one free bit per group of antecedents sharing a prefix
    std::vector<std::uint64_t> keys;
    std::vector<std::vector<int>> groups;
    for (int a = 0; a < na_; ++a) {
      if (C.fixed[a][x] >= 0) {
        T_[a][x] = C.fixed[a][x];
        continue;
      }
      std::uint64_t key = 0;
      for (int q = 0; q < depth; ++q) key = (key << 1) | static_cast<std::uint64_t>(T_[a][order_[q]]);
      auto it = std::find(keys.begin(), keys.end(), key);
      if (it == keys.end()) {
        keys.push_back(key);
        groups.push_back({a});
      } else {
        groups[it - keys.begin()].push_back(a);
      }
    }
    bool found = skeleton3() != Tri::False && assign(groups, 0, depth);
    if (!found) {
      for (int a = 0; a < na_; ++a) T_[a][x] = -1;
      pos_[x] = -1;
      order_.pop_back();
    }
    return found;
  }

  bool assign(const std::vector<std::vector<int>>& groups, std::size_t g, int depth) {
    if (g == groups.size()) return dfs(depth + 1);
    int x = order_[depth];
    for (int bit = 0; bit < 2; ++bit) {
      for (int a : groups[g]) T_[a][x] = static_cast<std::int8_t>(bit);
      if (skeleton3() != Tri::False && assign(groups, g + 1, depth)) return true;
    }
    for (int a : groups[g]) T_[a][x] = -1;
    return false;
  }

  // --- leaves ---

  bool leaf() {
    ++stats.leaves;
    if (sys_ == System::AX) {
      if (skeleton3() != Tri::True) return false;
      emit({}, {});
      return true;
    }
    std::vector<int> open;  // forward influence atoms
    for (int i = 0; i < static_cast<int>(C.atoms.size()); ++i)
      if (C.atoms[i].influence && atom3(i) == Tri::Unknown) open.push_back(i);
    if (open.size() > 20) throw ScopeTooLarge("too many influence atoms");
    for (std::uint64_t tau = 0; tau < (std::uint64_t{1} << open.size()); ++tau) {
      if (cancelled()) return false;
      auto value = [&](int i) -> bool {
        const auto& at = C.atoms[i];
        if (!at.influence) return at.cons.evaluate([&](int x) { return T_[at.ant][x] != 0; });
        auto it = std::find(open.begin(), open.end(), i);
        return it != open.end() && ((tau >> (it - open.begin())) & 1);
      };
      if (!C.skeleton.evaluate(value)) continue;
      std::vector<std::pair<int, int>> P, N;  // positions
      for (std::size_t j = 0; j < open.size(); ++j) {
        const auto& at = C.atoms[open[j]];
        ((tau >> j) & 1 ? P : N).emplace_back(pos_[at.src], pos_[at.tgt]);
      }
      std::vector<std::vector<bool>> fns;
      if (realize(P, N, fns)) {
        emit(P, fns);
        return true;
      }
    }
    return false;
  }

  std::vector<std::int8_t> fixed_rows(int k) const {
    std::vector<std::int8_t> rows(std::size_t{1} << k, -1);
    int x = order_[k];
    for (int a = 0; a < na_; ++a) {
      if (C.fixed[a][x] >= 0) continue;
      std::uint64_t key = 0;
      for (int q = 0; q < k; ++q) key = (key << 1) | static_cast<std::uint64_t>(T_[a][order_[q]]);
      rows[key] = T_[a][x];
    }
    return rows;
  }

  bool realize(const std::vector<std::pair<int, int>>& P, const std::vector<std::pair<int, int>>& N,
               std::vector<std::vector<bool>>& fns) {
    std::vector<std::vector<std::int8_t>> rows(n_);
    for (int k = 0; k < n_; ++k) rows[k] = fixed_rows(k);
    std::vector<std::vector<int>> forbidden(n_);  // sources that may not reach k
    int last = -1;
    for (auto [s, t] : N) {
      forbidden[t].push_back(s);
      last = std::max(last, t);
    }
    fns.assign(n_, {});
    if (sys_ == System::AXPlusT) {
      std::vector<std::uint64_t> reach(n_, 0), chosen(n_, 0);
      std::vector<std::vector<std::uint64_t>> supports(n_);
      for (int k = 0; k < n_; ++k) supports[k] = minimal_supports(rows[k], k);
      auto rec = [&](auto&& self, int k) -> bool {
        if (k == n_) return true;
        for (auto s : supports[k]) {
          std::uint64_t r = 0;
          for (int q = 0; q < k; ++q)
            if ((s >> q) & 1) r |= (std::uint64_t{1} << q) | reach[q];
          for (auto [ps, pt] : P)
            if (pt == k) r |= (std::uint64_t{1} << ps) | reach[ps];
          bool ok = true;
          for (int j : forbidden[k]) ok = ok && !((r >> j) & 1);
          if (!ok) continue;
          reach[k] = r;
          chosen[k] = s;
          if (self(self, k + 1)) return true;
        }
        return false;
      };
      if (!rec(rec, 0)) return false;
      for (int k = 0; k < n_; ++k) fns[k] = projection_fill(rows[k], k, chosen[k]);
      return true;
    }
    // AX+: completions position by position, each checked by exact influence on its prefix
    auto rec = [&](auto&& self, int k) -> bool {
      if (k == n_) return true;
      if (cancelled()) return false;
      if (k > last) {
        fns[k] = projection_fill(rows[k], k, (std::uint64_t{1} << k) - 1);
        return self(self, k + 1);
      }
      auto ok = [&]() {
        for (int j : forbidden[k])
          if (detail::table_influence(fns, j, k)) return false;
        return true;
      };
      std::vector<std::vector<bool>> tried;
      for (auto s : minimal_supports(rows[k], k)) {
        fns[k] = projection_fill(rows[k], k, s);
        tried.push_back(fns[k]);
        if (ok() && self(self, k + 1)) return true;
      }
      std::vector<std::size_t> free;
      for (std::size_t r = 0; r < rows[k].size(); ++r)
        if (rows[k][r] < 0) free.push_back(r);
      if (free.size() > 24) throw ScopeTooLarge("completion search over 2^" + std::to_string(free.size()) + " tables");
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
        std::vector<bool> f(rows[k].size());
        for (std::size_t r = 0; r < f.size(); ++r) f[r] = rows[k][r] > 0;
        for (std::size_t i = 0; i < free.size(); ++i) f[free[i]] = (mask >> i) & 1;
        if (std::find(tried.begin(), tried.end(), f) != tried.end()) continue;
        fns[k] = std::move(f);
        if (ok() && self(self, k + 1)) return true;
      }
      return false;
    };
    return rec(rec, 0);
  }

  void emit(const std::vector<std::pair<int, int>>& P, const std::vector<std::vector<bool>>& fns) {
    SatCertificate c;
    c.system = sys_;
    for (int x : order_) c.order.push_back(C.vars[x]);
    for (int a = 0; a < na_; ++a) {
      auto& row = c.table[C.ants[a]];
      for (int x = 0; x < n_; ++x) row[C.vars[x]] = T_[a][x] != 0;
    }
    for (auto [s, t] : P) c.influence.emplace(C.vars[order_[s]], C.vars[order_[t]]);
    for (int k = 0; k < static_cast<int>(fns.size()); ++k) c.fns[C.vars[order_[k]]] = fns[k];
    cert = std::move(c);
  }

  const Compiled& C;
  System sys_;
  int n_, na_;
  const std::atomic<int>* best_;
  int task_;
  std::vector<int> order_, pos_;
  std::vector<std::vector<std::int8_t>> T_;
};

}  // namespace

SatResult solve_sat(const Formula& f, System system, const SatOptions& opts) {
  Compiled C = detail::compile(f);
  if (C.has_influence && system == System::AX) throw Error("influence atoms need AX+ or AX+T");
  const int n = static_cast<int>(C.vars.size());
  const int tasks = std::max(n, 1);

  std::vector<std::optional<SatCertificate>> found(tasks);
  std::vector<SatStats> stats(tasks);
  std::atomic<int> best{std::numeric_limits<int>::max()};
  auto run_task = [&](int t) {
    if (best.load() < t) return;
    Search s(C, system, &best, t);
    bool ok = s.run(t);
    stats[t] = s.stats;
    if (ok) {
      found[t] = std::move(s.cert);
      int cur = best.load();
      while (t < cur && !best.compare_exchange_weak(cur, t)) {
      }
    }
  };
  if (opts.exec == Exec::Parallel) {
    int threads = opts.jobs > 0 ? opts.jobs : omp_get_max_threads();
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int t = 0; t < tasks; ++t) {
      try {
        run_task(t);
      } catch (...) {
#pragma omp critical(oucl_sat_err)
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (int t = 0; t < tasks && best.load() == std::numeric_limits<int>::max(); ++t) run_task(t);
  }

  SatResult out;
  for (const auto& s : stats) {
    out.stats.nodes += s.nodes;
    out.stats.leaves += s.leaves;
  }
  int b = best.load();
  if (b == std::numeric_limits<int>::max()) return out;
  out.sat = true;
  out.certificate = std::move(found[b]);
  out.witness = synthesize_witness(f, *out.certificate);
  return out;
}

}  // namespace oucl
