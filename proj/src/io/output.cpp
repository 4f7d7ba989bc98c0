#include "evosync/io/output.hpp"

#include <charconv>
#include <cstdio>

#include <openssl/evp.h>

namespace evosync::io {
namespace {

void header_comment(std::ostream& out, std::string_view hash) {
  out << "# manifest_sha256=" << hash << '\n';
}

void join(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

std::string column(std::string_view prefix, std::size_t p, std::size_t region) {
  return std::string(prefix) + "_" + std::to_string(p) + "_" + std::to_string(region);
}

void state_cells(std::vector<std::string>& row, const SocialState& state,
                 const PayoffTable& payoffs) {
  for (double v : state.values()) row.push_back(format_number(v));
  for (double v : payoffs.payoff.values()) row.push_back(format_number(v));
  for (double v : payoffs.average) row.push_back(format_number(v));
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

nlohmann::json Manifest::document() const {
  auto doc = tree;
  doc["sha256"] = hash;
  return doc;
}

Manifest make_manifest(const ScenarioFile& file, std::string_view command) {
  Manifest m;
  m.tree = {{"tool", "evosync"},
            {"version", EVOSYNC_VERSION},
            {"command", std::string(command)},
            {"seed", file.seed},
            {"config", to_json(file)}};
  m.hash = sha256_hex(m.tree.dump());
  return m;
}

std::vector<std::string> trajectory_columns(const Scenario& scenario) {
  std::vector<std::string> cols{"step", "time"};
  for (const char* prefix : {"x", "pi"}) {
    for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
      for (auto r : scenario.population(p).strategies) cols.push_back(column(prefix, p, r));
    }
  }
  for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
    cols.push_back("pibar_" + std::to_string(p));
  }
  return cols;
}

void write_trajectory_csv(std::ostream& out, const Scenario& scenario, const Trajectory& trajectory,
                          std::string_view manifest_hash) {
  header_comment(out, manifest_hash);
  join(out, trajectory_columns(scenario));
  for (const auto& s : trajectory.samples) {
    std::vector<std::string> row{std::to_string(s.step), format_number(s.time)};
    state_cells(row, s.state, s.payoffs);
    join(out, row);
  }
}

void write_agents_csv(std::ostream& out, const Scenario& scenario,
                      const std::vector<AgentTrajectory>& runs, std::string_view manifest_hash) {
  header_comment(out, manifest_hash);
  auto cols = trajectory_columns(scenario);
  cols.insert(cols.begin(), "run");
  cols.insert(cols.begin() + 3, "ode_time");
  for (std::size_t p = 0; p < scenario.num_populations(); ++p) {
    for (auto r : scenario.population(p).strategies) cols.push_back(column("n", p, r));
  }
  join(out, cols);
  for (std::size_t run = 0; run < runs.size(); ++run) {
    const auto& traj = runs[run];
    for (std::size_t k = 0; k < traj.samples.size(); ++k) {
      const auto& s = traj.samples[k];
      std::vector<std::string> row{std::to_string(run), std::to_string(k), format_number(s.time),
                                   format_number(s.time * traj.time_scale)};
      state_cells(row, s.state, s.payoffs);
      for (const auto& block : s.counts.counts()) {
        for (auto c : block) row.push_back(std::to_string(c));
      }
      join(out, row);
    }
  }
}

void write_field_csv(std::ostream& out, const std::vector<FieldPoint>& field,
                     std::string_view manifest_hash) {
  header_comment(out, manifest_hash);
  out << "u,v,du,dv,skipped\n";
  for (const auto& pt : field) {
    out << format_number(pt.u) << ',' << format_number(pt.v) << ',';
    if (pt.skipped) {
      out << ",,1\n";
    } else {
      out << format_number(pt.du) << ',' << format_number(pt.dv) << ",0\n";
    }
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepEntry>& sweep,
                     std::string_view manifest_hash) {
  header_comment(out, manifest_hash);
  out << "alpha,steps,converged\n";
  for (const auto& e : sweep) {
    out << format_number(e.alpha) << ',' << (e.steps ? std::to_string(*e.steps) : std::string())
        << ',' << (e.steps ? 1 : 0) << '\n';
  }
}

nlohmann::json equilibria_json(const Scenario& scenario, const EquilibriumSearch& search,
                               std::size_t seeds, std::string_view manifest_hash) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : search.equilibria) {
    nlohmann::json state = nlohmann::json::array();
    for (std::size_t p = 0; p < r.state.populations(); ++p) {
      const auto b = r.state.block(p);
      state.push_back(std::vector<double>(b.begin(), b.end()));
    }
    nlohmann::json extinct = nlohmann::json::array();
    for (const auto& c : r.extinct) {
      extinct.push_back({{"population", c.population},
                         {"strategy", c.strategy},
                         {"region", scenario.population(c.population).strategies[c.strategy]}});
    }
    list.push_back({{"state", state},
                    {"residual", r.residual},
                    {"classification", r.interior() ? "interior" : "extinct"},
                    {"extinct", extinct},
                    {"basin_samples", r.basin_samples}});
  }
  return {{"manifest_sha256", std::string(manifest_hash)},
          {"seeds", seeds},
          {"equilibria", list},
          {"non_converged_seeds", search.non_converged}};
}

}  // namespace evosync::io
