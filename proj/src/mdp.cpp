#include "relest/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "relest/trigger.hpp"

namespace relest {

namespace {

using nlohmann::json;

// Coefficient vectors over the basis {h^0(Pbar), ..., h^depth(Pbar)}.
// h shifts mass up one basis index; mass at the top index stays there
// (saturation), which keeps the reachable set finite after quantization.
Vector shift_up(const Vector& c) {
  Vector out = Vector::Zero(c.size());
  for (Eigen::Index j = 0; j + 1 < c.size(); ++j) out[j + 1] = c[j];
  out[c.size() - 1] += c[c.size() - 1];
  return out;
}

Vector t_coeffs(const Vector& c, double alpha_hat) {
  Vector out = alpha_hat * shift_up(c);
  out[0] += 1.0 - alpha_hat;
  return out;
}

struct SensorBasis {
  std::vector<Matrix> h_pows;  // h^0(Pbar)..h^depth(Pbar)
  std::vector<double> traces;

  Matrix assemble(const Vector& c) const {
    Matrix out = c[0] * h_pows[0];
    for (Eigen::Index j = 1; j < c.size(); ++j) {
      if (c[j] != 0.0) out += c[j] * h_pows[j];
    }
    return out;
  }
  double trace_of(const Vector& c) const {
    double tr = 0.0;
    for (Eigen::Index j = 0; j < c.size(); ++j) tr += c[j] * traces[j];
    return tr;
  }
};

struct PointCache {
  double tr_h = 0.0;  // Tr h(P)
  int rank = 0;       // rank of h(P) - Pbar
};

struct Builder {
  const std::vector<CovMaps>* maps;
  MdpSettings settings;
  int n;
  std::vector<SensorBasis> basis;
  std::vector<std::vector<CovPoint>> grids;
  std::vector<std::vector<PointCache>> caches;
  std::vector<std::vector<int>> states;
  std::map<std::vector<int>, int> state_index;
  bool grew = false;

  void init() {
    basis.resize(n);
    grids.resize(n);
    caches.resize(n);
    for (int i = 0; i < n; ++i) {
      const CovMaps& m = (*maps)[i];
      basis[i].h_pows.resize(settings.depth + 1);
      basis[i].traces.resize(settings.depth + 1);
      basis[i].h_pows[0] = m.P_bar();
      for (int j = 1; j <= settings.depth; ++j) {
        basis[i].h_pows[j] = m.h(basis[i].h_pows[j - 1]);
      }
      for (int j = 0; j <= settings.depth; ++j) {
        basis[i].traces[j] = basis[i].h_pows[j].trace();
      }
      Vector e0 = Vector::Zero(settings.depth + 1);
      e0[0] = 1.0;
      add_point(i, e0);
    }
    std::vector<int> root(n, 0);
    add_state(root);
  }

  int add_point(int sensor, const Vector& c) {
    CovPoint p;
    p.coeffs = c;
    p.P = basis[sensor].assemble(c);
    p.trace = p.P.trace();
    grids[sensor].push_back(std::move(p));
    PointCache cache;
    const CovMaps& m = (*maps)[sensor];
    Matrix sigma = symmetrize(m.h(grids[sensor].back().P) - m.P_bar());
    cache.tr_h = grids[sensor].back().trace + sigma.trace();
    cache.rank = numerical_rank(sigma);
    caches[sensor].push_back(cache);
    grew = true;
    return static_cast<int>(grids[sensor].size()) - 1;
  }

  // Snap within relative trace tolerance 1/levels, else add a new point.
  int snap_or_add(int sensor, const Vector& c) {
    double tr = basis[sensor].trace_of(c);
    int best = nearest_point(sensor, tr);
    double other = grids[sensor][best].trace;
    double rel = std::abs(tr - other) / std::max({tr, other, 1e-300});
    if (rel <= 1.0 / settings.levels) return best;
    return add_point(sensor, c);
  }

  int nearest_point(int sensor, double tr) const {
    int best = 0;
    double best_d = std::abs(grids[sensor][0].trace - tr);
    for (std::size_t j = 1; j < grids[sensor].size(); ++j) {
      double d = std::abs(grids[sensor][j].trace - tr);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    return best;
  }

  int add_state(const std::vector<int>& s) {
    auto it = state_index.find(s);
    if (it != state_index.end()) return it->second;
    if (states.size() >= settings.state_cap) {
      throw std::runtime_error(
          "MDP state cap (" + std::to_string(settings.state_cap) +
          ") exceeded; use coarser quantization (smaller levels) or a smaller "
          "depth");
    }
    states.push_back(s);
    int idx = static_cast<int>(states.size()) - 1;
    state_index.emplace(s, idx);
    grew = true;
    return idx;
  }

  Queue queue_for(const MdpAction& action, const std::vector<int>& state) const {
    if (!action.queue.order.empty()) return action.queue;
    std::vector<SensorSnapshot> snaps(n);
    for (int i = 0; i < n; ++i) {
      snaps[i].tr_p_bar = basis[i].traces[0];
      snaps[i].tr_h_p = caches[i][state[i]].tr_h;
      snaps[i].rank = caches[i][state[i]].rank;
    }
    return greedy_order(snaps);
  }

  // Enumerate successors of (state, action); snap chooses grid handling.
  template <typename Snap>
  std::vector<std::pair<std::vector<int>, double>> successors(
      const std::vector<int>& state, const MdpAction& action, Snap&& snap) {
    Queue q = queue_for(action, state);
    std::vector<std::pair<std::vector<int>, double>> out;
    double survive = 1.0;
    for (int m = 0; m < n && survive > 0.0; ++m) {
      int sm = q.order[m];
      double prob;
      if (m == n - 1) {
        prob = survive;
        survive = 0.0;
      } else {
        double ah = action.alpha_hats[m];
        int r = caches[sm][state[sm]].rank;
        double beta = r == 0 ? 1.0 : std::pow(ah, 0.5 * r);
        prob = survive * (1.0 - beta);
        survive *= beta;
      }
      if (prob <= 0.0) continue;
      // transmitter resets; earlier positions held (t); later see h
      std::vector<int> next(n);
      for (int pos = 0; pos < n; ++pos) {
        int s = q.order[pos];
        const Vector& c = grids[s][state[s]].coeffs;
        Vector nc;
        if (pos == m) {
          nc = Vector::Zero(settings.depth + 1);
          nc[0] = 1.0;
        } else if (pos < m) {
          nc = t_coeffs(c, action.alpha_hats[pos]);
        } else {
          nc = shift_up(c);
        }
        next[s] = snap(s, nc);
      }
      out.emplace_back(std::move(next), prob);
    }
    return out;
  }
};

std::vector<MdpAction> build_actions(int n, const MdpSettings& settings) {
  std::vector<MdpAction> actions;
  if (n == 1) {
    MdpAction a;
    a.queue.order = {0};
    actions.push_back(a);
    return actions;
  }
  std::vector<double> grid(settings.alpha_grid);
  for (int g = 0; g < settings.alpha_grid; ++g) {
    grid[g] = settings.alpha_grid == 1
                  ? 0.0
                  : static_cast<double>(g) / (settings.alpha_grid - 1);
  }
  std::vector<Queue> queues;
  if (n <= 3) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      queues.push_back(Queue{perm});
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    queues.push_back(Queue{});  // resolved per state by greedy_order
  }
  // all alpha_hat combinations over the n-1 tunable positions
  std::vector<double> combo(n - 1, 0.0);
  std::vector<int> idx(n - 1, 0);
  for (;;) {
    for (int p = 0; p < n - 1; ++p) combo[p] = grid[idx[p]];
    for (const Queue& q : queues) {
      MdpAction a;
      a.queue = q;
      a.alpha_hats = combo;
      actions.push_back(a);
    }
    int p = 0;
    while (p < n - 1 && ++idx[p] == settings.alpha_grid) {
      idx[p] = 0;
      ++p;
    }
    if (p == n - 1) break;
  }
  return actions;
}

}  // namespace

MdpModel build_mdp(const std::vector<CovMaps>& maps, const MdpSettings& settings) {
  if (maps.empty()) throw std::invalid_argument("build_mdp: no systems");
  if (settings.depth < 1 || settings.levels < 2 || settings.alpha_grid < 1) {
    throw std::invalid_argument("build_mdp: need depth >= 1, levels >= 2, alpha_grid >= 1");
  }
  Builder b;
  b.maps = &maps;
  b.settings = settings;
  b.n = static_cast<int>(maps.size());
  b.init();

  std::vector<MdpAction> actions = build_actions(b.n, settings);

  // Closure: expanding a state can add grid points, which can re-route the
  // snapping of states expanded earlier, so passes repeat until stable.
  auto snap_build = [&](int s, const Vector& c) { return b.snap_or_add(s, c); };
  do {
    b.grew = false;
    for (std::size_t v = 0; v < b.states.size(); ++v) {
      for (const MdpAction& a : actions) {
        for (auto& [next, prob] : b.successors(b.states[v], a, snap_build)) {
          (void)prob;
          b.add_state(next);
        }
      }
    }
  } while (b.grew);

  // Frozen grids: recompute all rows with unconditional nearest snapping,
  // adding any tuple that nearest-snapping produces but closure missed.
  auto snap_final = [&](int s, const Vector& c) {
    return b.nearest_point(s, b.basis[s].trace_of(c));
  };
  MdpModel model;
  for (;;) {
    bool added = false;
    model.rows.assign(b.states.size(), {});
    for (std::size_t v = 0; v < b.states.size(); ++v) {
      model.rows[v].resize(actions.size());
      for (std::size_t ai = 0; ai < actions.size(); ++ai) {
        std::map<int, double> merged;
        for (auto& [next, prob] : b.successors(b.states[v], actions[ai], snap_final)) {
          auto it = b.state_index.find(next);
          int ni;
          if (it == b.state_index.end()) {
            ni = b.add_state(next);
            added = true;
          } else {
            ni = it->second;
          }
          merged[ni] += prob;
        }
        auto& row = model.rows[v][ai];
        double total = 0.0;
        for (auto& [ni, p] : merged) {
          row.emplace_back(ni, p);
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) {
          throw std::logic_error("transition row does not sum to 1");
        }
      }
    }
    if (!added) break;
  }

  model.settings = settings;
  model.n = b.n;
  if (b.n > 3) {
    model.state_queue.reserve(b.states.size());
    for (const auto& s : b.states) {
      model.state_queue.push_back(b.queue_for(MdpAction{}, s));
    }
  }
  model.grids = std::move(b.grids);
  model.states = std::move(b.states);
  model.actions = std::move(actions);
  model.stage_cost.resize(model.states.size());
  for (std::size_t v = 0; v < model.states.size(); ++v) {
    double c = 0.0;
    for (int i = 0; i < model.n; ++i) {
      c += model.grids[i][model.states[v][i]].trace;
    }
    model.stage_cost[v] = c;
  }
  return model;
}

MdpPolicy relative_value_iteration(const MdpModel& model, double tol,
                                   int max_iter) {
  const std::size_t S = model.n_states();
  const std::size_t A = model.n_actions();
  std::vector<double> hv(S, 0.0), w(S, 0.0);
  std::vector<int> best_action(S, 0);
  std::vector<double> span_tail;

  double g = 0.0;
  int it = 0;
  for (it = 1; it <= max_iter; ++it) {
    for (std::size_t v = 0; v < S; ++v) {
      double best = std::numeric_limits<double>::infinity();
      int barg = 0;
      for (std::size_t a = 0; a < A; ++a) {
        double exp_h = 0.0;
        for (const auto& [ni, p] : model.rows[v][a]) exp_h += p * hv[ni];
        // aperiodicity transform: kernel (I + Q)/2, same average cost
        double q = model.stage_cost[v] + 0.5 * hv[v] + 0.5 * exp_h;
        if (q < best - 1e-15) {
          best = q;
          barg = static_cast<int>(a);
        }
      }
      w[v] = best;
      best_action[v] = barg;
    }
    double dmin = w[0] - hv[0], dmax = dmin;
    for (std::size_t v = 1; v < S; ++v) {
      double d = w[v] - hv[v];
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    double span = dmax - dmin;
    g = 0.5 * (dmax + dmin);
    double ref = w[0];
    for (std::size_t v = 0; v < S; ++v) hv[v] = w[v] - ref;
    span_tail.push_back(span);
    if (span_tail.size() > 8) span_tail.erase(span_tail.begin());
    if (span < tol) break;
  }
  if (it > max_iter) {
    std::ostringstream os;
    os << "relative value iteration did not converge in " << max_iter
       << " sweeps; span history:";
    for (double s : span_tail) os << " " << s;
    throw std::runtime_error(os.str());
  }

  MdpPolicy policy;
  policy.settings = model.settings;
  policy.n = model.n;
  policy.grids = model.grids;
  policy.states = model.states;
  policy.actions = model.actions;
  policy.state_queue = model.state_queue;
  policy.action_index = std::move(best_action);
  policy.relative_values = std::move(hv);
  policy.average_cost = g;
  policy.iterations = it;
  policy.span = span_tail.empty() ? 0.0 : span_tail.back();
  return policy;
}

MdpPolicy relative_value_iteration(const MdpModel& model) {
  return relative_value_iteration(model, model.settings.rvi_tol,
                                  model.settings.rvi_max_iter);
}

std::pair<Queue, std::vector<double>> mdp_policy_step(
    const MdpPolicy& policy, const std::vector<Matrix>& current_P) {
  if (static_cast<int>(current_P.size()) != policy.n) {
    throw std::invalid_argument("mdp_policy_step: wrong number of covariances");
  }
  std::vector<double> tr(policy.n);
  for (int i = 0; i < policy.n; ++i) tr[i] = current_P[i].trace();

  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < policy.states.size(); ++v) {
    double d = 0.0;
    for (int i = 0; i < policy.n; ++i) {
      d += std::abs(policy.grids[i][policy.states[v][i]].trace - tr[i]);
    }
    if (d < best_d - 1e-15) {
      best_d = d;
      best = static_cast<int>(v);
    }
  }

  const MdpAction& a = policy.actions[policy.action_index[best]];
  Queue q = a.queue;
  if (q.order.empty()) q = policy.state_queue.at(best);
  std::vector<double> alphas(policy.n, kInfAlpha);
  for (int pos = 0; pos + 1 < policy.n; ++pos) {
    alphas[q.order[pos]] = alpha_of_hat(a.alpha_hats[pos]);
  }
  return {q, alphas};
}

std::string system_fingerprint(const std::vector<CovMaps>& maps) {
  // FNV-1a over a stable text rendering of the system matrices
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  auto mix = [&hash](const std::string& s) {
    for (unsigned char c : s) {
      hash ^= c;
      hash *= 0x100000001B3ULL;
    }
  };
  char buf[64];
  for (const CovMaps& m : maps) {
    const LtiSystem& sys = m.system();
    for (const Matrix* mat : {&sys.A, &sys.C, &sys.Q, &sys.R}) {
      for (Eigen::Index i = 0; i < mat->rows(); ++i) {
        for (Eigen::Index j = 0; j < mat->cols(); ++j) {
          std::snprintf(buf, sizeof(buf), "%.12g,", (*mat)(i, j));
          mix(buf);
        }
      }
      mix(";");
    }
    mix("|");
  }
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

void save_policy(const MdpPolicy& policy, const std::string& path) {
  json j;
  j["format"] = "relest-mdp-policy";
  j["version"] = 1;
  j["fingerprint"] = policy.system_fingerprint;
  j["n"] = policy.n;
  j["settings"] = {{"depth", policy.settings.depth},
                   {"levels", policy.settings.levels},
                   {"alpha_grid", policy.settings.alpha_grid},
                   {"state_cap", policy.settings.state_cap},
                   {"rvi_tol", policy.settings.rvi_tol},
                   {"rvi_max_iter", policy.settings.rvi_max_iter}};
  j["average_cost"] = policy.average_cost;
  j["iterations"] = policy.iterations;
  j["span"] = policy.span;
  json grids = json::array();
  for (const auto& grid : policy.grids) {
    json pts = json::array();
    for (const CovPoint& p : grid) {
      json pt;
      pt["coeffs"] = std::vector<double>(p.coeffs.data(),
                                         p.coeffs.data() + p.coeffs.size());
      pt["trace"] = p.trace;
      pts.push_back(std::move(pt));
    }
    grids.push_back(std::move(pts));
  }
  j["grids"] = std::move(grids);
  j["states"] = policy.states;
  json actions = json::array();
  for (const MdpAction& a : policy.actions) {
    actions.push_back({{"queue", a.queue.order}, {"alpha_hats", a.alpha_hats}});
  }
  j["actions"] = std::move(actions);
  json state_queues = json::array();
  for (const Queue& q : policy.state_queue) state_queues.push_back(q.order);
  j["state_queues"] = std::move(state_queues);
  j["action_index"] = policy.action_index;
  j["relative_values"] = policy.relative_values;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write policy file: " + path);
  out << j.dump(1) << "\n";
}

MdpPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy file: " + path);
  json j = json::parse(in);
  if (j.value("format", "") != "relest-mdp-policy") {
    throw std::runtime_error("not a relest MDP policy file: " + path);
  }
  if (j.value("version", 0) != 1) {
    throw std::runtime_error("unsupported policy file version");
  }
  MdpPolicy p;
  p.system_fingerprint = j.value("fingerprint", "");
  p.n = j.at("n").get<int>();
  const json& s = j.at("settings");
  p.settings.depth = s.at("depth").get<int>();
  p.settings.levels = s.at("levels").get<int>();
  p.settings.alpha_grid = s.at("alpha_grid").get<int>();
  p.settings.state_cap = s.at("state_cap").get<std::size_t>();
  p.settings.rvi_tol = s.at("rvi_tol").get<double>();
  p.settings.rvi_max_iter = s.at("rvi_max_iter").get<int>();
  p.average_cost = j.at("average_cost").get<double>();
  p.iterations = j.value("iterations", 0);
  p.span = j.value("span", 0.0);
  for (const json& grid : j.at("grids")) {
    std::vector<CovPoint> pts;
    for (const json& pt : grid) {
      CovPoint cp;
      auto coeffs = pt.at("coeffs").get<std::vector<double>>();
      cp.coeffs = Eigen::Map<const Vector>(coeffs.data(), coeffs.size());
      cp.trace = pt.at("trace").get<double>();
      pts.push_back(std::move(cp));
    }
    p.grids.push_back(std::move(pts));
  }
  p.states = j.at("states").get<std::vector<std::vector<int>>>();
  for (const json& a : j.at("actions")) {
    MdpAction act;
    act.queue.order = a.at("queue").get<std::vector<int>>();
    act.alpha_hats = a.at("alpha_hats").get<std::vector<double>>();
    p.actions.push_back(std::move(act));
  }
  for (const json& q : j.value("state_queues", json::array())) {
    p.state_queue.push_back(Queue{q.get<std::vector<int>>()});
  }
  p.action_index = j.at("action_index").get<std::vector<int>>();
  p.relative_values = j.at("relative_values").get<std::vector<double>>();
  return p;
}

}  // namespace relest
