#ifndef SENSYNTH_SAT_HPP_
#define SENSYNTH_SAT_HPP_

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace sensynth::sat {

// Literal encoding: 2*var for the positive literal, 2*var+1 for the negation.
struct Lit {
  int code = 0;

  int var() const { return code >> 1; }
  bool negated() const { return code & 1; }
  Lit operator~() const { return Lit{code ^ 1}; }
  friend bool operator==(Lit, Lit) = default;
  friend auto operator<=>(Lit, Lit) = default;
};

inline Lit pos(int var) { return Lit{2 * var}; }
inline Lit neg(int var) { return Lit{2 * var + 1}; }
inline Lit make_lit(int var, bool value) { return value ? pos(var) : neg(var); }

using Clause = std::vector<Lit>;

// Plain clause list, used for DIMACS round trips and independent model
// checking.
struct Cnf {
  int num_vars = 0;
  std::vector<Clause> clauses;
};

Cnf read_dimacs(std::istream& in);
void write_dimacs(std::ostream& out, const Cnf& cnf);
bool satisfies(const Cnf& cnf, const std::vector<bool>& model);

enum class Status { kSat, kUnsat, kTimeout };

struct SolveResult {
  Status status = Status::kUnsat;
  double elapsed_seconds = 0.0;
};

struct SolverStats {
  int64_t decisions = 0;
  int64_t conflicts = 0;
  int64_t propagations = 0;
  int64_t restarts = 0;
  int64_t learnt_clauses = 0;
};

// Incremental CDCL solver: two watched literals, 1UIP learning with local
// minimisation, VSIDS with phase saving, Luby restarts and activity-based
// learnt clause reduction. Clauses may be added between solve() calls; the
// constraint set only grows.
class Solver {
 public:
  explicit Solver(uint64_t seed = 0);

  int new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }
  int num_clauses() const { return num_original_; }

  // Returns false once the formula is known to be unsatisfiable.
  bool add_clause(std::span<const Lit> lits);
  bool add_clause(std::initializer_list<Lit> lits) {
    return add_clause(std::span<const Lit>(lits.begin(), lits.size()));
  }

  // Sequential-counter encoding of "at least k of lits are true". k larger
  // than the literal count makes the formula unsatisfiable.
  void add_at_least(std::span<const Lit> lits, int k);
  void add_at_most(std::span<const Lit> lits, int k);

  // Preferred polarity for the next decision on `var`.
  void set_phase(int var, bool value);

  SolveResult solve(std::chrono::duration<double> budget,
                    std::span<const Lit> assumptions = {});
  SolveResult solve() { return solve(std::chrono::hours(24 * 365)); }

  // Valid after a kSat answer.
  bool model_value(int var) const { return model_[var]; }
  bool model_value(Lit lit) const { return model_[lit.var()] != lit.negated(); }
  const std::vector<bool>& model() const { return model_; }

  bool okay() const { return ok_; }
  const SolverStats& stats() const { return stats_; }

  void load(const Cnf& cnf);

 private:
  enum : int8_t { kTrue = 0, kFalse = 1, kUndef = 2 };

  struct ClauseData {
    std::vector<Lit> lits;
    bool learnt = false;
    bool deleted = false;
    double activity = 0.0;
  };
  struct Watcher {
    int cref;
    Lit blocker;
  };

  int8_t value(Lit l) const {
    const int8_t v = assigns_[l.var()];
    return v == kUndef ? static_cast<int8_t>(kUndef) : static_cast<int8_t>(v ^ l.negated());
  }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void enqueue(Lit l, int reason);
  int propagate();
  void analyze(int conflict, std::vector<Lit>& learnt, int& backtrack_level);
  bool literal_redundant(Lit l) const;
  void cancel_until(int level);
  int pick_branch_var();
  void attach(int cref);
  void bump_var(int var);
  void bump_clause(ClauseData& c);
  void reduce_db();
  bool locked(int cref) const;

  // Binary max-heap over variables ordered by activity, lower id first on
  // ties.
  bool heap_less(int a, int b) const {
    return activity_[a] > activity_[b] ||
           (activity_[a] == activity_[b] && a < b);
  }
  void heap_insert(int var);
  int heap_pop();
  void heap_up(int pos);
  void heap_down(int pos);

  bool ok_ = true;
  uint64_t rng_state_;
  std::vector<ClauseData> clauses_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<int8_t> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<bool> phase_;
  std::vector<double> activity_;
  std::vector<char> seen_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  size_t qhead_ = 0;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  std::vector<int> learnts_;
  double max_learnts_ = 0.0;
  int num_original_ = 0;
  std::vector<bool> model_;
  SolverStats stats_;
};

}  // namespace sensynth::sat

#endif  // SENSYNTH_SAT_HPP_
