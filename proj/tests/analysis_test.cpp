#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "testkit.hpp"

using namespace dcrypps;

namespace {

InvariantProperty property_on(const std::string& id, const std::string& observable, Severity s = Severity::kCatastrophic) {
  InvariantProperty p;
  p.id = id;
  p.category = "safety";
  p.severity = s;
  p.expression = PropertyExpr::compare(CompareOp::kLe, Term{observable, std::nullopt}, "T");
  return p;
}

const InvariantProperty& prop(const Inputs& in, const std::string& id) {
  for (const auto& p : in.properties.properties) {
    if (p.id == id) return p;
  }
  throw std::runtime_error("no property " + id);
}

std::set<std::string> attack_components(const DiagnosisResult& r, const std::string& attack) {
  std::set<std::string> out;
  for (const auto& c : r.causes) {
    if (c.cause.is_cyber() && c.cause.attack == attack) out.insert(c.component);
  }
  return out;
}

}  // namespace

TEST(HittingSets, SmallCases) {
  using S = std::set<int>;
  EXPECT_EQ(minimal_hitting_sets<int>({}, 2), std::vector<S>{S{}});
  EXPECT_EQ(minimal_hitting_sets<int>({{1, 2}, {2, 3}}, 2), (std::vector<S>{{2}, {1, 3}}));
  EXPECT_EQ(minimal_hitting_sets<int>({{1, 2}, {2, 3}}, 1), (std::vector<S>{{2}}));
  EXPECT_EQ(minimal_hitting_sets<int>({{1}, {2}, {3}}, 2), std::vector<S>{});
  EXPECT_THROW(minimal_hitting_sets<int>({{1}}, 0), Error);
}

TEST(HittingSets, MatchesExhaustiveEnumeration) {
  testkit::Rng rng(20240501);
  for (int i = 0; i < 300; ++i) {
    auto conflicts = testkit::random_conflicts(rng, 8, 5);
    int card = testkit::uniform(rng, 1, 8);
    EXPECT_EQ(minimal_hitting_sets(conflicts, card), oracle::brute_force_mhs(conflicts, card)) << "case " << i;
  }
}

TEST(HittingSets, EveryResultHitsEveryConflictAndIsMinimal) {
  testkit::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    auto conflicts = testkit::random_conflicts(rng, 10, 6);
    for (const auto& hs : minimal_hitting_sets(conflicts, 10)) {
      for (const auto& c : conflicts) {
        EXPECT_TRUE(std::any_of(c.begin(), c.end(), [&](int x) { return hs.count(x) > 0; }));
      }
      for (int x : hs) {
        auto smaller = hs;
        smaller.erase(x);
        bool still = std::all_of(conflicts.begin(), conflicts.end(), [&](const auto& c) {
          return std::any_of(c.begin(), c.end(), [&](int y) { return smaller.count(y) > 0; });
        });
        EXPECT_FALSE(still);
      }
    }
  }
}

TEST(Support, BundledAutopilotDistances) {
  auto in = testkit::use_case();
  std::map<std::string, int> got;
  for (const auto& e : support_from(in.model, {"controller.program"})) got[e.component] = e.distance;
  std::map<std::string, int> expected{{"controller.program", 0}, {"localnet", 1}, {"controller", 1},
                                      {"gps", 2}, {"vor", 2}, {"controller.webserver", 2}, {"fc", 2},
                                      {"cellnet", 3}, {"station", 4}};
  EXPECT_EQ(got, expected);
  EXPECT_EQ(oracle::relaxed_distances(in.model, {"controller.program"}), expected);
}

TEST(Support, TrajectoryViolationImplicatesSensorsNetworkAndProgram) {
  auto in = testkit::use_case();
  std::set<std::string> ids;
  for (const auto& e : support_set(in.model, prop(in, "on-trajectory"))) ids.insert(e.component);
  for (const char* id : {"gps", "vor", "localnet", "controller.program"}) EXPECT_TRUE(ids.count(id)) << id;
}

TEST(Support, RandomModelsAgreeWithRelaxationOracle) {
  testkit::Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    auto s = testkit::random_system(rng);
    for (const auto& p : s.properties) {
      auto anchors = anchors_of(s.model, p.observables());
      std::map<std::string, int> got;
      for (const auto& e : support_set(s.model, p)) got[e.component] = e.distance;
      EXPECT_EQ(got, oracle::relaxed_distances(s.model, anchors)) << "model " << i;
    }
  }
}

TEST(Support, JointAssertionTakesMinimumDistanceAndMarksCommon) {
  auto in = testkit::use_case();
  auto all = enumerate_assertions(in.properties.properties, 2);
  auto joint = support_set(in.model, all[2]);
  auto a = support_set(in.model, all[0]);
  auto b = support_set(in.model, all[1]);
  std::map<std::string, int> da, db;
  for (const auto& e : a) da[e.component] = e.distance;
  for (const auto& e : b) db[e.component] = e.distance;
  for (const auto& e : joint) {
    int expected = std::min(da.count(e.component) ? da[e.component] : 99, db.count(e.component) ? db[e.component] : 99);
    EXPECT_EQ(e.distance, expected);
    EXPECT_EQ(e.common, da.count(e.component) && db.count(e.component));
  }
  EXPECT_TRUE(std::is_sorted(joint.begin(), joint.end(), [](const auto& x, const auto& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.component < y.component;
  }));
}

TEST(Support, UnknownAnchorIsAnError) {
  auto in = testkit::use_case();
  EXPECT_THROW(support_from(in.model, {"nowhere"}), Error);
}

TEST(Matching, GpsOverLocalNetworkAdmitsMitmSpoofing) {
  auto in = testkit::use_case();
  Topology topo(in.model);
  auto matches = applicable_attacks(in.model, topo, "gps", false, in.properties.assumptions, builtin_kb());
  ASSERT_FALSE(matches.empty());
  const auto& m = matches.front();
  EXPECT_EQ(m.attack, "spoof-via-mitm");
  EXPECT_EQ(m.bindings.at("peer"), "controller.program");
  EXPECT_EQ(m.bindings.at("channel"), "localnet");
  EXPECT_DOUBLE_EQ(m.exposure, 0.4);
  EXPECT_EQ(render_requirement(in.model, *find_attack(builtin_kb(), "spoof-via-mitm"), m),
            "Traffic from GPS to Autopilot Program over Local Network must be integrity-protected and authenticated.");
}

TEST(Matching, StationChannelRendersWanRequirement) {
  auto in = testkit::use_case();
  Topology topo(in.model);
  auto matches = applicable_attacks(in.model, topo, "station", false, in.properties.assumptions, builtin_kb());
  auto it = std::find_if(matches.begin(), matches.end(), [](const auto& m) { return m.attack == "spoof-via-mitm"; });
  ASSERT_NE(it, matches.end());
  EXPECT_EQ(it->bindings.at("endpoint"), "controller");
  EXPECT_EQ(render_requirement(in.model, *find_attack(builtin_kb(), "spoof-via-mitm"), *it),
            "WAN (Cellular) communication between Ground Station and Autopilot should be authenticated using public "
            "key encryption.");
  EXPECT_EQ(requirement_targets(*find_attack(builtin_kb(), "spoof-via-mitm"), *it),
            (std::set<std::string>{"cellnet", "controller.program"}));
}

TEST(Matching, IsolatedComponentMatchesNothing) {
  SystemModel m;
  m.components["x"] = ComponentInstance{"x", "X", ComponentKind::kSensor};
  Topology topo(m);
  EXPECT_TRUE(applicable_attacks(m, topo, "x", true, ThreatAssumptions{}, builtin_kb()).empty());
}

TEST(Matching, UnboundPlaceholderIsAnError) {
  EXPECT_THROW(fill_template("Protect {peer}.", {{"component", "A"}}), Error);
  EXPECT_EQ(fill_template("{component} and {component}", {{"component", "A"}}), "A and A");
}

TEST(Matching, DeadlineAttacksNeedATimingViolation) {
  auto in = testkit::use_case();
  Topology topo(in.model);
  auto without = applicable_attacks(in.model, topo, "controller", false, in.properties.assumptions, builtin_kb());
  auto with = applicable_attacks(in.model, topo, "controller", true, in.properties.assumptions, builtin_kb());
  std::set<std::string> a, b;
  for (const auto& m : without) a.insert(m.attack);
  for (const auto& m : with) b.insert(m.attack);
  EXPECT_FALSE(a.count("timing-job-flood"));
  EXPECT_TRUE(b.count("timing-job-flood"));
  EXPECT_TRUE(b.count("timing-process-load"));
  auto nets = applicable_attacks(in.model, topo, "localnet", true, in.properties.assumptions, builtin_kb());
  ASSERT_EQ(nets.size(), 1u);
  EXPECT_EQ(nets[0].attack, "timing-network-saturation");
  EXPECT_EQ(nets[0].bindings.at("peer"), "controller.program");
}

namespace {

// Independent statement of access soundness for one match.
bool access_ok(const AttackModel& a, const ThreatAssumptions& t) {
  const auto& r = a.applicability;
  if (r.requires_physical_access && !t.physical_access) return false;
  if (r.requires_supply_chain && !t.supply_chain_tampering) return false;
  if (r.requires_design_knowledge && !t.full_design_knowledge) return false;
  if (r.requires_remote_channel.empty()) return true;
  for (auto ch : r.requires_remote_channel) {
    if (ch != RemoteChannel::kNone && t.remote_channels.count(ch)) return true;
  }
  return false;
}

}  // namespace

TEST(Matching, FilteringIsSoundAndMonotone) {
  testkit::Rng rng(31);
  const auto& kb = builtin_kb();
  for (int i = 0; i < 150; ++i) {
    auto s = testkit::random_system(rng);
    auto t = testkit::random_assumptions(rng);
    ThreatAssumptions wider = t;
    wider.physical_access = true;
    wider.remote_channels = {RemoteChannel::kInternet, RemoteChannel::kRadio};
    Topology topo(s.model);
    for (const auto& [id, c] : s.model.components) {
      bool deadline = testkit::coin(rng);
      auto narrow = applicable_attacks(s.model, topo, id, deadline, t, kb);
      auto wide = applicable_attacks(s.model, topo, id, deadline, wider, kb);
      for (const auto& m : narrow) {
        EXPECT_TRUE(access_ok(*find_attack(kb, m.attack), t));
        EXPECT_NE(std::find(wide.begin(), wide.end(), m), wide.end());
        for (const auto& [role, target] : m.bindings) EXPECT_TRUE(s.model.has_component(target));
      }
      EXPECT_TRUE(std::is_sorted(narrow.begin(), narrow.end(),
                                 [](const auto& x, const auto& y) { return x.attack < y.attack; }));
    }
  }
}

TEST(Probability, HardwareSoftwareAndCyber) {
  ComponentInstance c{"gps", "GPS", ComponentKind::kSensor};
  c.mtbf_hours = 20000;
  c.defect_rate = 0.003;
  ProbabilityContext ctx{10.0, &builtin_kb(), nullptr};
  EXPECT_NEAR(cause_probability(c, CauseKind::hardware(), ctx), 1.0 - std::exp(-10.0 / 20000.0), 1e-12);
  EXPECT_EQ(cause_probability(c, CauseKind::software(), ctx), 0.003);
  EXPECT_NEAR(cause_probability(c, CauseKind::cyber("spoof-via-mitm"), ctx, 0.8), 0.24, 1e-15);
  EXPECT_THROW(cause_probability(c, CauseKind::cyber("nope"), ctx), Error);
  ParamTable params{{"failure/gps", 0.5}, {"attack/spoof-via-mitm", 0.1}};
  ctx.params = &params;
  EXPECT_EQ(cause_probability(c, CauseKind::hardware(), ctx), 0.5);
  EXPECT_NEAR(cause_probability(c, CauseKind::cyber("spoof-via-mitm"), ctx, 0.4), 0.04, 1e-15);
  ctx.mission_hours = 0;
  EXPECT_THROW(cause_probability(c, CauseKind::hardware(), ctx), Error);
}

TEST(Probability, DistanceDecay) {
  EXPECT_EQ(adjust_for_distance(0.3, 0, 0.6), 0.3);
  EXPECT_NEAR(adjust_for_distance(0.3, 2, 0.6), 0.108, 1e-15);
  EXPECT_EQ(adjust_for_distance(0.3, 5, 1.0), 0.3);
  EXPECT_THROW(adjust_for_distance(0.3, 1, 0.0), Error);
  EXPECT_THROW(adjust_for_distance(0.3, 1, 1.5), Error);
  EXPECT_THROW(adjust_for_distance(0.3, -1, 0.5), Error);
}

TEST(Diagnosis, TrajectoryViolationCandidates) {
  auto in = testkit::use_case();
  auto r = diagnose(in.model, negate(prop(in, "on-trajectory")), builtin_kb(), in.properties.assumptions, DiagnosisConfig{});
  auto mitm = attack_components(r, "spoof-via-mitm");
  EXPECT_TRUE(mitm.count("gps"));
  EXPECT_TRUE(mitm.count("vor"));
  EXPECT_TRUE(mitm.count("fc"));
  for (const auto& c : r.causes) {
    EXPECT_NE(c.cause.attack, "physical-tamper");
  }
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_EQ(r.hitting_sets.size(), r.conflicts[0].size());
  EXPECT_FALSE(r.truncated);
  EXPECT_EQ(r.total_candidates, r.candidates.size());
}

TEST(Diagnosis, JointAssertionHasOneConflictPerProperty) {
  auto in = testkit::use_case();
  auto all = enumerate_assertions(in.properties.properties, 2);
  auto r = diagnose(in.model, all[2], builtin_kb(), in.properties.assumptions, DiagnosisConfig{});
  EXPECT_EQ(r.conflicts.size(), 2u);
}

TEST(Diagnosis, RankedListMatchesDirectRecomputation) {
  auto in = testkit::use_case();
  DiagnosisConfig cfg;
  const auto& kb = builtin_kb();
  auto r = diagnose(in.model, negate(prop(in, "sensor-agreement")), kb, in.properties.assumptions, cfg);
  std::map<std::string, int> dist;
  for (const auto& e : r.support) dist[e.component] = e.distance;
  // Spreadsheet-style recomputation from model attributes and KB constants.
  std::map<std::string, double> expected;
  for (const auto& [id, c] : in.model.components) {
    if (!dist.count(id)) continue;
    double decay = std::pow(cfg.alpha, dist[id]);
    if (c.mtbf_hours) expected[id + "/hardware-failure"] = (1.0 - std::exp(-cfg.mission_hours / *c.mtbf_hours)) * decay;
    if (c.defect_rate) expected[id + "/software-bug"] = *c.defect_rate * decay;
  }
  Topology topo(in.model);
  for (const auto& [id, d] : dist) {
    std::map<std::string, double> best;
    for (const auto& m : applicable_attacks(in.model, topo, id, false, in.properties.assumptions, kb)) {
      std::string surface = m.bindings.count("channel") ? m.bindings.at("channel") : id;
      double f = 0.4;
      for (auto e : in.model.component(surface).exposure) {
        f = std::max(f, e == Exposure::kInternetFacing ? 1.0 : e == Exposure::kRadio ? 0.8 : 0.4);
      }
      best[m.attack] = std::max(best[m.attack], f);
    }
    for (const auto& [attack, f] : best) {
      expected[id + "/cyber-attack:" + attack] = find_attack(kb, attack)->base_likelihood * f * std::pow(cfg.alpha, d);
    }
  }
  ASSERT_EQ(r.candidates.size(), expected.size());
  for (const auto& cand : r.candidates) {
    ASSERT_EQ(cand.cardinality(), 1u);
    EXPECT_NEAR(cand.probability, expected.at(cand.causes[0].key()), 1e-15) << cand.causes[0].key();
  }
  for (std::size_t i = 1; i < r.candidates.size(); ++i) {
    EXPECT_FALSE(candidate_before(r.candidates[i], r.candidates[i - 1]));
  }
}

TEST(Diagnosis, MitigationsDropOrScaleCauses) {
  auto in = testkit::use_case();
  auto a = negate(prop(in, "on-trajectory"));
  auto base = diagnose(in.model, a, builtin_kb(), in.properties.assumptions, DiagnosisConfig{});
  auto dropped = diagnose(in.model, a, builtin_kb(), in.properties.assumptions, DiagnosisConfig{},
                          {{{"gps", "spoof-via-mitm"}, 1.0}});
  EXPECT_FALSE(attack_components(dropped, "spoof-via-mitm").count("gps"));
  auto scaled = diagnose(in.model, a, builtin_kb(), in.properties.assumptions, DiagnosisConfig{},
                         {{{"gps", "spoof-via-mitm"}, 0.75}});
  auto find = [](const DiagnosisResult& r) {
    for (const auto& c : r.causes) {
      if (c.component == "gps" && c.cause.attack == "spoof-via-mitm") return c;
    }
    throw std::runtime_error("missing");
  };
  EXPECT_TRUE(find(scaled).mitigated);
  EXPECT_NEAR(find(scaled).adjusted_probability, find(base).adjusted_probability * 0.25, 1e-15);
}

TEST(Diagnosis, CandidateCapTruncates) {
  auto in = testkit::use_case();
  DiagnosisConfig cfg;
  cfg.candidate_cap = 3;
  auto r = diagnose(in.model, negate(prop(in, "on-trajectory")), builtin_kb(), in.properties.assumptions, cfg);
  EXPECT_TRUE(r.truncated);
  EXPECT_EQ(r.candidates.size(), 3u);
  EXPECT_GT(r.total_candidates, 3u);
  cfg.max_cardinality = 0;
  EXPECT_THROW(diagnose(in.model, negate(prop(in, "on-trajectory")), builtin_kb(), in.properties.assumptions, cfg),
               Error);
}

TEST(Diagnosis, EmptySupportIsAnError) {
  SystemModel m;
  m.components["a"] = ComponentInstance{"a", "A", ComponentKind::kProgram};
  auto p = property_on("p", "missing");
  EXPECT_THROW(diagnose(m, negate(p), builtin_kb(), ThreatAssumptions{}, DiagnosisConfig{}), Error);
}
