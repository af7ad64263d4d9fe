#include "sensynth/sat.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sensynth::sat {

namespace {

// Luby sequence value for index i (0-based): 1 1 2 1 1 2 4 ...
double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

constexpr double kVarDecay = 0.95;
constexpr double kClauseDecay = 0.999;
constexpr int kRestartUnit = 100;
constexpr int kNoReason = -1;

}  // namespace

Solver::Solver(uint64_t seed) : rng_state_(seed ^ 0x9E3779B97F4A7C15ULL) {}

int Solver::new_var() {
  const int v = num_vars();
  watches_.emplace_back();
  watches_.emplace_back();
  assigns_.push_back(kUndef);
  level_.push_back(0);
  reason_.push_back(kNoReason);
  phase_.push_back(false);
  activity_.push_back(0.0);
  seen_.push_back(0);
  heap_pos_.push_back(-1);
  heap_insert(v);
  return v;
}

void Solver::set_phase(int var, bool value) { phase_[var] = value; }

void Solver::attach(int cref) {
  const ClauseData& c = clauses_[cref];
  watches_[(~c.lits[0]).code].push_back({cref, c.lits[1]});
  watches_[(~c.lits[1]).code].push_back({cref, c.lits[0]});
}

bool Solver::add_clause(std::span<const Lit> lits_in) {
  if (!ok_) return false;
  if (decision_level() != 0) cancel_until(0);
  std::vector<Lit> lits(lits_in.begin(), lits_in.end());
  for (Lit l : lits) {
    if (l.var() < 0 || l.var() >= num_vars()) {
      throw std::out_of_range("clause refers to an unknown variable");
    }
  }
  std::sort(lits.begin(), lits.end());
  size_t j = 0;
  for (size_t i = 0; i < lits.size(); ++i) {
    const Lit l = lits[i];
    if (value(l) == kTrue) return true;
    if (j > 0 && lits[j - 1] == ~l) return true;  // tautology
    if (value(l) == kFalse) continue;
    if (j > 0 && lits[j - 1] == l) continue;
    lits[j++] = l;
  }
  lits.resize(j);
  ++num_original_;
  if (lits.empty()) {
    ok_ = false;
    return false;
  }
  if (lits.size() == 1) {
    enqueue(lits[0], kNoReason);
    if (propagate() != kNoReason) ok_ = false;
    return ok_;
  }
  clauses_.push_back({std::move(lits), false, false, 0.0});
  attach(static_cast<int>(clauses_.size()) - 1);
  return true;
}

void Solver::add_at_most(std::span<const Lit> lits, int k) {
  const int n = static_cast<int>(lits.size());
  if (k >= n) return;
  if (k < 0) {
    add_clause(std::span<const Lit>{});
    return;
  }
  if (k == 0) {
    for (Lit l : lits) add_clause({~l});
    return;
  }
  // Sinz sequential counter: s[i][j] means at least j+1 of lits[0..i] true.
  std::vector<std::vector<int>> s(n - 1, std::vector<int>(k));
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 0; j < k; ++j) s[i][j] = new_var();
  }
  add_clause({~lits[0], pos(s[0][0])});
  for (int j = 1; j < k; ++j) add_clause({neg(s[0][j])});
  for (int i = 1; i < n - 1; ++i) {
    add_clause({~lits[i], pos(s[i][0])});
    add_clause({neg(s[i - 1][0]), pos(s[i][0])});
    for (int j = 1; j < k; ++j) {
      add_clause({~lits[i], neg(s[i - 1][j - 1]), pos(s[i][j])});
      add_clause({neg(s[i - 1][j]), pos(s[i][j])});
    }
    add_clause({~lits[i], neg(s[i - 1][k - 1])});
  }
  add_clause({~lits[n - 1], neg(s[n - 2][k - 1])});
}

void Solver::add_at_least(std::span<const Lit> lits, int k) {
  const int n = static_cast<int>(lits.size());
  if (k <= 0) return;
  if (k > n) {
    add_clause(std::span<const Lit>{});
    return;
  }
  if (k == 1) {
    add_clause(lits);
    return;
  }
  std::vector<Lit> negated;
  negated.reserve(lits.size());
  for (Lit l : lits) negated.push_back(~l);
  add_at_most(negated, n - k);
}

void Solver::enqueue(Lit l, int reason) {
  const int v = l.var();
  assigns_[v] = l.negated() ? kFalse : kTrue;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_.push_back(l);
}

int Solver::propagate() {
  int conflict = kNoReason;
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];  // p became true; watchers of ~p fire
    std::vector<Watcher>& ws = watches_[p.code];
    ++stats_.propagations;
    size_t i = 0, j = 0;
    const Lit false_lit = ~p;
    while (i < ws.size()) {
      const Watcher w = ws[i];
      if (value(w.blocker) == kTrue) {
        ws[j++] = ws[i++];
        continue;
      }
      ClauseData& c = clauses_[w.cref];
      if (c.deleted) {
        ++i;
        continue;
      }
      if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
      ++i;
      const Lit first = c.lits[0];
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = {w.cref, first};
        continue;
      }
      bool moved = false;
      for (size_t k = 2; k < c.lits.size(); ++k) {
        if (value(c.lits[k]) != kFalse) {
          std::swap(c.lits[1], c.lits[k]);
          watches_[(~c.lits[1]).code].push_back({w.cref, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = {w.cref, first};
      if (value(first) == kFalse) {
        conflict = w.cref;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, w.cref);
      }
    }
    ws.resize(j);
    if (conflict != kNoReason) break;
  }
  return conflict;
}

void Solver::bump_var(int var) {
  activity_[var] += var_inc_;
  if (activity_[var] > 1e100) {
    for (double& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[var] >= 0) heap_up(heap_pos_[var]);
}

void Solver::bump_clause(ClauseData& c) {
  c.activity += clause_inc_;
  if (c.activity > 1e20) {
    for (int cref : learnts_) clauses_[cref].activity *= 1e-20;
    clause_inc_ *= 1e-20;
  }
}

bool Solver::literal_redundant(Lit l) const {
  // Local minimisation: l is implied by other literals already in the clause.
  const int r = reason_[l.var()];
  if (r == kNoReason) return false;
  for (Lit q : clauses_[r].lits) {
    if (q.var() == l.var()) continue;
    if (!seen_[q.var()] && level_[q.var()] > 0) return false;
  }
  return true;
}

void Solver::analyze(int conflict, std::vector<Lit>& learnt,
                     int& backtrack_level) {
  learnt.clear();
  learnt.push_back(Lit{});  // placeholder for the asserting literal
  int path = 0;
  Lit p{-1};
  int index = static_cast<int>(trail_.size()) - 1;
  int cref = conflict;
  do {
    ClauseData& c = clauses_[cref];
    if (c.learnt) bump_clause(c);
    for (Lit q : c.lits) {
      if (p.code >= 0 && q == p) continue;
      const int v = q.var();
      if (!seen_[v] && level_[v] > 0) {
        bump_var(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level()) {
          ++path;
        } else {
          learnt.push_back(q);
        }
      }
    }
    while (!seen_[trail_[index].var()]) --index;
    p = trail_[index--];
    cref = reason_[p.var()];
    seen_[p.var()] = 0;
    --path;
  } while (path > 0);
  learnt[0] = ~p;

  std::vector<Lit> kept{learnt[0]};
  for (size_t i = 1; i < learnt.size(); ++i) {
    if (!literal_redundant(learnt[i])) kept.push_back(learnt[i]);
  }
  for (size_t i = 1; i < learnt.size(); ++i) seen_[learnt[i].var()] = 0;
  learnt.swap(kept);

  backtrack_level = 0;
  if (learnt.size() > 1) {
    size_t max_i = 1;
    for (size_t i = 2; i < learnt.size(); ++i) {
      if (level_[learnt[i].var()] > level_[learnt[max_i].var()]) max_i = i;
    }
    std::swap(learnt[1], learnt[max_i]);
    backtrack_level = level_[learnt[1].var()];
  }
}

void Solver::cancel_until(int level) {
  if (decision_level() <= level) return;
  for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[level];
       --i) {
    const int v = trail_[i].var();
    phase_[v] = !trail_[i].negated();
    assigns_[v] = kUndef;
    reason_[v] = kNoReason;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(trail_lim_[level]);
  trail_lim_.resize(level);
  qhead_ = trail_.size();
}

int Solver::pick_branch_var() {
  while (!heap_.empty()) {
    const int v = heap_pop();
    if (assigns_[v] == kUndef) return v;
  }
  return -1;
}

bool Solver::locked(int cref) const {
  const ClauseData& c = clauses_[cref];
  const int v = c.lits[0].var();
  return reason_[v] == cref && value(c.lits[0]) == kTrue;
}

void Solver::reduce_db() {
  std::sort(learnts_.begin(), learnts_.end(), [&](int a, int b) {
    const ClauseData& ca = clauses_[a];
    const ClauseData& cb = clauses_[b];
    const bool bin_a = ca.lits.size() == 2, bin_b = cb.lits.size() == 2;
    if (bin_a != bin_b) return !bin_a;
    return ca.activity < cb.activity;
  });
  const double limit = clause_inc_ / static_cast<double>(learnts_.size());
  std::vector<int> kept;
  const size_t half = learnts_.size() / 2;
  for (size_t i = 0; i < learnts_.size(); ++i) {
    ClauseData& c = clauses_[learnts_[i]];
    const bool removable = c.lits.size() > 2 && !locked(learnts_[i]) &&
                           (i < half || c.activity < limit);
    if (removable) {
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
    } else {
      kept.push_back(learnts_[i]);
    }
  }
  learnts_.swap(kept);
  // Purge watchers of deleted clauses.
  for (auto& ws : watches_) {
    std::erase_if(ws, [&](const Watcher& w) { return clauses_[w.cref].deleted; });
  }
}

SolveResult Solver::solve(std::chrono::duration<double> budget,
                          std::span<const Lit> assumptions) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const auto deadline =
      start + std::chrono::duration_cast<Clock::duration>(
                  std::min(budget, std::chrono::duration<double>(1e9)));
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };
  model_.clear();
  if (!ok_) return {Status::kUnsat, elapsed()};
  cancel_until(0);
  if (propagate() != kNoReason) {
    ok_ = false;
    return {Status::kUnsat, elapsed()};
  }
  max_learnts_ = std::max(1000.0, num_original_ / 3.0);

  std::vector<Lit> learnt;
  int restart_index = 0;
  int64_t tick = 0;
  Status status = Status::kTimeout;
  bool done = false;
  while (!done) {
    const int64_t conflict_limit =
        static_cast<int64_t>(luby(2.0, restart_index++) * kRestartUnit);
    int64_t conflicts_here = 0;
    while (true) {
      if ((++tick & 63) == 0 && Clock::now() >= deadline) {
        status = Status::kTimeout;
        done = true;
        break;
      }
      const int conflict = propagate();
      if (conflict != kNoReason) {
        ++stats_.conflicts;
        ++conflicts_here;
        if (decision_level() == 0) {
          ok_ = false;
          status = Status::kUnsat;
          done = true;
          break;
        }
        int bt = 0;
        analyze(conflict, learnt, bt);
        // Never backtrack below the assumption levels without reason; the
        // next loop re-asserts the assumptions as decisions.
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          clauses_.push_back({learnt, true, false, 0.0});
          const int cref = static_cast<int>(clauses_.size()) - 1;
          attach(cref);
          bump_clause(clauses_[cref]);
          learnts_.push_back(cref);
          ++stats_.learnt_clauses;
          enqueue(learnt[0], cref);
        }
        var_inc_ /= kVarDecay;
        clause_inc_ /= kClauseDecay;
        continue;
      }
      if (conflicts_here >= conflict_limit) {
        ++stats_.restarts;
        cancel_until(0);
        break;
      }
      if (static_cast<double>(learnts_.size()) - trail_.size() >=
          max_learnts_) {
        reduce_db();
        max_learnts_ *= 1.1;
      }
      Lit next{-1};
      bool assumption_failed = false;
      while (decision_level() < static_cast<int>(assumptions.size())) {
        const Lit a = assumptions[decision_level()];
        if (value(a) == kTrue) {
          trail_lim_.push_back(static_cast<int>(trail_.size()));
        } else if (value(a) == kFalse) {
          assumption_failed = true;
          break;
        } else {
          next = a;
          break;
        }
      }
      if (assumption_failed) {
        status = Status::kUnsat;
        done = true;
        break;
      }
      if (next.code < 0) {
        ++stats_.decisions;
        const int v = pick_branch_var();
        if (v < 0) {
          status = Status::kSat;
          done = true;
          break;
        }
        next = make_lit(v, phase_[v]);
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(next, kNoReason);
    }
  }
  if (status == Status::kSat) {
    model_.resize(num_vars());
    for (int v = 0; v < num_vars(); ++v) model_[v] = assigns_[v] == kTrue;
  }
  cancel_until(0);
  return {status, elapsed()};
}

void Solver::load(const Cnf& cnf) {
  while (num_vars() < cnf.num_vars) new_var();
  for (const Clause& c : cnf.clauses) add_clause(c);
}

void Solver::heap_insert(int var) {
  heap_pos_[var] = static_cast<int>(heap_.size());
  heap_.push_back(var);
  heap_up(heap_pos_[var]);
}

int Solver::heap_pop() {
  const int top = heap_[0];
  heap_pos_[top] = -1;
  const int last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_pos_[last] = 0;
    heap_down(0);
  }
  return top;
}

void Solver::heap_up(int pos) {
  const int v = heap_[pos];
  while (pos > 0) {
    const int parent = (pos - 1) / 2;
    if (!heap_less(v, heap_[parent])) break;
    heap_[pos] = heap_[parent];
    heap_pos_[heap_[pos]] = pos;
    pos = parent;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

void Solver::heap_down(int pos) {
  const int v = heap_[pos];
  const int n = static_cast<int>(heap_.size());
  while (true) {
    int child = 2 * pos + 1;
    if (child >= n) break;
    if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
    if (!heap_less(heap_[child], v)) break;
    heap_[pos] = heap_[child];
    heap_pos_[heap_[pos]] = pos;
    pos = child;
  }
  heap_[pos] = v;
  heap_pos_[v] = pos;
}

Cnf read_dimacs(std::istream& in) {
  Cnf cnf;
  std::string line;
  Clause current;
  bool header = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "c" || first[0] == 'c') continue;
    if (first == "p") {
      std::string fmt;
      int nclauses = 0;
      if (!(ls >> fmt >> cnf.num_vars >> nclauses) || fmt != "cnf") {
        throw std::runtime_error("malformed DIMACS header");
      }
      header = true;
      continue;
    }
    if (!header) throw std::runtime_error("DIMACS clause before header");
    std::istringstream all(line);
    long long lit = 0;
    while (all >> lit) {
      if (lit == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
      } else {
        const int var = static_cast<int>(std::llabs(lit)) - 1;
        if (var >= cnf.num_vars) {
          throw std::runtime_error("DIMACS literal exceeds declared variables");
        }
        current.push_back(make_lit(var, lit > 0));
      }
    }
  }
  if (!current.empty()) cnf.clauses.push_back(std::move(current));
  return cnf;
}

void write_dimacs(std::ostream& out, const Cnf& cnf) {
  out << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const Clause& c : cnf.clauses) {
    for (Lit l : c) out << (l.negated() ? -(l.var() + 1) : l.var() + 1) << ' ';
    out << "0\n";
  }
}

bool satisfies(const Cnf& cnf, const std::vector<bool>& model) {
  for (const Clause& c : cnf.clauses) {
    bool sat = false;
    for (Lit l : c) {
      if (l.var() < static_cast<int>(model.size()) &&
          model[l.var()] != l.negated()) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

}  // namespace sensynth::sat
