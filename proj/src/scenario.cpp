#include "sensynth/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace sensynth::scenario {

namespace {

constexpr int kDirs8[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                              {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
constexpr int kDirs4[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
constexpr int kRetryCap = 12;
constexpr double kGammaTolerance = 0.5;

int occupied_neighbours(const GridRegion& region, Cell c) {
  int n = 0;
  for (const auto& d : kDirs8) {
    const Cell q{c.col + d[0], c.row + d[1]};
    if (region.in_bounds(q) && region.occupied(q)) ++n;
  }
  return n;
}

// Labels of the 4-connected free components; returns the component count.
int free_components(const GridRegion& region, std::vector<int>& label) {
  label.assign(region.cell_count(), -1);
  int count = 0;
  std::deque<int> queue;
  for (int s = 0; s < region.cell_count(); ++s) {
    if (region.occupied(s) || label[s] >= 0) continue;
    label[s] = count;
    queue.push_back(s);
    while (!queue.empty()) {
      const Cell c = region.cell_at(queue.front());
      queue.pop_front();
      for (const auto& d : kDirs4) {
        const Cell q{c.col + d[0], c.row + d[1]};
        if (!region.in_bounds(q) || region.occupied(q)) continue;
        const int qi = region.index(q);
        if (label[qi] < 0) {
          label[qi] = count;
          queue.push_back(qi);
        }
      }
    }
    ++count;
  }
  return count;
}

bool free_connected(const GridRegion& region) {
  std::vector<int> label;
  return free_components(region, label) <= 1;
}

class Builder {
 public:
  Builder(const ScenarioSpec& spec, std::mt19937_64& rng, int target)
      : spec_(spec),
        rng_(rng),
        target_(target),
        region_(GridRegion::Open(spec.width, spec.height, spec.cell_size)) {}

  bool run() {
    place_clusters();
    fill_to_count();
    if (!merge_pockets()) return false;
    climb();
    return true;
  }

  const GridRegion& region() const { return region_; }

 private:
  int rand_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }

  double gamma() const { return count_ == 0 ? 0.0 : static_cast<double>(sum_) / count_; }

  void occupy(Cell c) {
    sum_ += 2 * occupied_neighbours(region_, c);
    region_.set_occupied(c, true);
    ++count_;
  }
  void release(Cell c) {
    region_.set_occupied(c, false);
    sum_ -= 2 * occupied_neighbours(region_, c);
    --count_;
  }

  void place_clusters() {
    int best_a = 1;
    int best_b = 1;
    double best = std::abs(spec_.gamma_target);
    for (int a = 1; a <= std::min(12, spec_.height); ++a) {
      for (int b = a; b <= std::min(12, spec_.width); ++b) {
        if (a * b > target_) continue;
        const double d = std::abs(block_gamma(a, b) - spec_.gamma_target);
        if (d < best - 1e-9) {
          best = d;
          best_a = a;
          best_b = b;
        }
      }
    }
    while (target_ - count_ >= best_a * best_b) {
      const bool flip = best_a != best_b && rand_int(0, 1) == 1 && best_b <= spec_.height &&
                        best_a <= spec_.width;
      const int h = flip ? best_b : best_a;
      const int w = flip ? best_a : best_b;
      if (!place_block(w, h)) break;
    }
  }

  bool place_block(int w, int h) {
    for (int pass = 0; pass < 2; ++pass) {
      const bool halo = pass == 0;
      for (int attempt = 0; attempt < 200; ++attempt) {
        const int col0 = rand_int(0, spec_.width - w);
        const int row0 = rand_int(0, spec_.height - h);
        if (block_clear(col0, row0, w, h, halo)) {
          for (int r = row0; r < row0 + h; ++r) {
            for (int c = col0; c < col0 + w; ++c) occupy({c, r});
          }
          return true;
        }
      }
    }
    return false;
  }

  bool block_clear(int col0, int row0, int w, int h, bool halo) const {
    const int m = halo ? 1 : 0;
    for (int r = row0 - m; r < row0 + h + m; ++r) {
      for (int c = col0 - m; c < col0 + w + m; ++c) {
        const Cell q{c, r};
        if (region_.in_bounds(q) && region_.occupied(q)) return false;
      }
    }
    return true;
  }

  void fill_to_count() {
    std::vector<int> free;
    for (int i = 0; i < region_.cell_count(); ++i) {
      if (!region_.occupied(i)) free.push_back(i);
    }
    std::shuffle(free.begin(), free.end(), rng_);
    for (int i : free) {
      if (count_ >= target_) break;
      occupy(region_.cell_at(i));
    }
  }

  // Absorbs enclosed free pockets and reopens as many occupied cells on the
  // border of the main free component.
  bool merge_pockets() {
    for (int guard = 0; guard < region_.cell_count(); ++guard) {
      std::vector<int> label;
      const int comps = free_components(region_, label);
      if (comps <= 1) return true;
      std::vector<int> size(comps, 0);
      for (int l : label) {
        if (l >= 0) ++size[l];
      }
      int primary = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
      int filled = 0;
      for (int i = 0; i < region_.cell_count(); ++i) {
        if (label[i] >= 0 && label[i] != primary) {
          occupy(region_.cell_at(i));
          ++filled;
        }
      }
      for (int reopen = 0; reopen < filled; ++reopen) {
        std::vector<Cell> border;
        for (int i = 0; i < region_.cell_count(); ++i) {
          if (!region_.occupied(i)) continue;
          const Cell c = region_.cell_at(i);
          for (const auto& d : kDirs4) {
            const Cell q{c.col + d[0], c.row + d[1]};
            if (region_.in_bounds(q) && !region_.occupied(q) &&
                label[region_.index(q)] == primary) {
              border.push_back(c);
              break;
            }
          }
        }
        if (border.empty()) return false;
        release(border[rand_int(0, static_cast<int>(border.size()) - 1)]);
        // Reopened cells join the main component.
        free_components(region_, label);
        std::fill(size.begin(), size.end(), 0);
        size.resize(*std::max_element(label.begin(), label.end()) + 1, 0);
        for (int l : label) {
          if (l >= 0) ++size[l];
        }
        primary = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
      }
    }
    return free_connected(region_);
  }

  void climb() {
    if (count_ == 0 || count_ == region_.cell_count()) return;
    const int iterations = std::max(2000, 40 * count_);
    for (int it = 0; it < iterations; ++it) {
      const double now = gamma();
      const double diff = now - spec_.gamma_target;
      if (std::abs(diff) < 0.2) return;
      const bool up = diff < 0;
      const Cell a = pick(true, up);
      const Cell b = pick(false, up);
      if (a == b) continue;
      release(a);
      occupy(b);
      const double next = gamma();
      if (std::abs(next - spec_.gamma_target) < std::abs(diff) && free_connected(region_)) {
        continue;
      }
      release(b);
      occupy(a);
    }
  }

  // up: remove sparse occupied cells and fill crowded free ones.
  Cell pick(bool occupied, bool up) {
    Cell best{-1, -1};
    int best_score = 0;
    for (int sample = 0; sample < 8; ++sample) {
      const int i = rand_int(0, region_.cell_count() - 1);
      if (region_.occupied(i) != occupied) continue;
      const Cell c = region_.cell_at(i);
      const int n = occupied_neighbours(region_, c);
      const int score = (occupied == up) ? -n : n;
      if (best.col < 0 || score > best_score) {
        best = c;
        best_score = score;
      }
    }
    if (best.col >= 0) return best;
    for (int i = 0; i < region_.cell_count(); ++i) {
      if (region_.occupied(i) == occupied) return region_.cell_at(i);
    }
    return {0, 0};
  }

  const ScenarioSpec& spec_;
  std::mt19937_64& rng_;
  int target_;
  GridRegion region_;
  int count_ = 0;
  int64_t sum_ = 0;
};

std::pair<int, int> line_column(const std::string& text, size_t offset) {
  int line = 1;
  int column = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

double compute_gamma(const GridRegion& region) {
  int occupied = 0;
  int64_t sum = 0;
  for (int i = 0; i < region.cell_count(); ++i) {
    if (!region.occupied(i)) continue;
    ++occupied;
    sum += occupied_neighbours(region, region.cell_at(i));
  }
  if (occupied == 0) throw UndefinedGamma();
  return static_cast<double>(sum) / occupied;
}

double block_gamma(int a, int b) {
  GridRegion block = GridRegion::Open(b, a, 1.0);
  for (int i = 0; i < block.cell_count(); ++i) block.set_occupied(block.cell_at(i), true);
  return compute_gamma(block);
}

Generated generate(const ScenarioSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw std::invalid_argument("empty grid");
  if (!(spec.extent >= 0.0 && spec.extent < 1.0)) {
    throw std::invalid_argument("extent must lie in [0, 1)");
  }
  if (!(spec.cell_size > 0.0)) throw std::invalid_argument("cell size must be positive");
  const int cells = spec.width * spec.height;
  const int target = static_cast<int>(std::lround(spec.extent * cells));
  Generated out;
  if (target == 0) {
    out.region = GridRegion::Open(spec.width, spec.height, spec.cell_size);
    out.attempts = 1;
    return out;
  }
  if (target >= cells) throw GenerationFailed("no free cell left", spec.extent, 0.0);

  std::mt19937_64 rng(spec.seed);
  std::optional<GridRegion> best;
  double best_diff = 0.0;
  for (int attempt = 1; attempt <= kRetryCap; ++attempt) {
    Builder builder(spec, rng, target);
    out.attempts = attempt;
    if (!builder.run()) continue;
    const double g = compute_gamma(builder.region());
    const double diff = std::abs(g - spec.gamma_target);
    if (!best || diff < best_diff) {
      best = builder.region();
      best_diff = diff;
    }
    if (diff <= kGammaTolerance) break;
  }
  if (!best) {
    throw GenerationFailed("free space could not be kept connected", spec.extent, 0.0);
  }
  out.region = *best;
  out.extent_achieved = static_cast<double>(out.region.occupied_count()) / cells;
  out.gamma_achieved = compute_gamma(out.region);
  out.gamma_in_tolerance = best_diff <= kGammaTolerance;
  return out;
}

GridRegion parse_ascii_map(const std::string& text, double cell_size) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty map", 1, 1);
  const int width = static_cast<int>(lines[0].size());
  if (width == 0) throw ParseError("empty row", 1, 1);
  const int height = static_cast<int>(lines.size());
  std::vector<bool> occ(static_cast<size_t>(width) * height, false);
  for (int li = 0; li < height; ++li) {
    const std::string& line = lines[li];
    for (int c = 0; c < static_cast<int>(line.size()); ++c) {
      if (c >= width) throw ParseError("row longer than the first row", li + 1, c + 1);
      const char ch = line[c];
      if (ch != '#' && ch != '.') {
        throw ParseError(std::string("unexpected character '") + ch + "'", li + 1, c + 1);
      }
      occ[static_cast<size_t>(height - 1 - li) * width + c] = ch == '#';
    }
    if (static_cast<int>(line.size()) < width) {
      throw ParseError("row shorter than the first row", li + 1,
                       static_cast<int>(line.size()) + 1);
    }
  }
  return GridRegion(width, height, cell_size, std::move(occ));
}

std::string to_ascii_map(const GridRegion& region) {
  std::string out;
  for (int row = region.height() - 1; row >= 0; --row) {
    for (int col = 0; col < region.width(); ++col) {
      out += region.occupied(Cell{col, row}) ? '#' : '.';
    }
    out += '\n';
  }
  return out;
}

std::string to_json(const Scenario& scenario) {
  using nlohmann::json;
  const GridRegion& r = scenario.region;
  json j;
  j["width"] = r.width();
  j["height"] = r.height();
  j["cell_size_m"] = r.cell_size();
  json rows = json::array();
  std::istringstream map(to_ascii_map(r));
  for (std::string line; std::getline(map, line);) rows.push_back(line);
  j["occupancy"] = rows;
  json sensors = json::array();
  for (const SensorSpec& s : scenario.sensors) {
    sensors.push_back({{"type_id", s.type_id}, {"r_s_m", s.sensing_radius},
                       {"r_c_m", s.comm_radius}});
  }
  j["sensors"] = sensors;
  j["k"] = scenario.k;
  j["seed"] = scenario.seed;
  return j.dump(2) + "\n";
}

Scenario from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("malformed JSON", line, column);
  }
  Scenario s;
  try {
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const double cell = j.at("cell_size_m").get<double>();
    if (width < 1 || height < 1 || !(cell > 0.0)) {
      throw ParseError("grid dimensions must be positive", 1, 1);
    }
    std::string map;
    for (const auto& row : j.at("occupancy")) map += row.get<std::string>() + "\n";
    s.region = parse_ascii_map(map, cell);
    if (s.region.width() != width || s.region.height() != height) {
      throw ParseError("occupancy does not match width/height", 1, 1);
    }
    for (const auto& sj : j.at("sensors")) {
      SensorSpec spec;
      spec.type_id = sj.at("type_id").get<int>();
      spec.sensing_radius = sj.at("r_s_m").get<double>();
      spec.comm_radius = sj.at("r_c_m").get<double>();
      if (!(spec.sensing_radius > 0.0) || !(spec.comm_radius > 0.0)) {
        throw ParseError("sensor radii must be positive", 1, 1);
      }
      s.sensors.push_back(spec);
    }
    s.k = j.at("k").get<std::vector<int>>();
    s.seed = j.value("seed", uint64_t{0});
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad scenario field: ") + e.what(), 1, 1);
  }
  if (s.k.size() != s.sensors.size()) {
    throw ParseError("k needs one entry per sensor type", 1, 1);
  }
  return s;
}

Scenario load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void save(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(scenario);
}

}  // namespace sensynth::scenario
