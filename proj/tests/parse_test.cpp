#include <gtest/gtest.h>

#include <algorithm>

#include "testkit.hpp"

using namespace dcrypps;
using testkit::data_path;
using testkit::slurp;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

template <typename Fn>
std::string message_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected an Error";
  return {};
}

constexpr const char* kListing = R"(
(defpclass Network [] :meta {:kind network :display "Local Network"})
(defpclass CellularNetwork [] :meta {:kind network})
(defpclass VOR [localnet] :meta {:kind sensor})
(defpclass GPS [localnet] :meta {:kind sensor})
(defpclass FlightControls [localnet] :meta {:kind actuator})
(defpclass AutoPilotProgram [board localnet] :meta {:kind program})
(defpclass WebServer [board cellnet] :meta {:kind server})
(defpclass ControllerBoard [localnet cellnet]
  :fields {:program (pclass AutoPilotProgram self localnet)
           :webserver (pclass WebServer self cellnet)}
  :meta {:kind board})
;;; This class wires components
(defpclass AutoPilotUnit []
  :fields {:n2 (lvar "localnetwork" Network)
           :cn1 (lvar "internet" CellularNetwork)
           :gps (pclass GPS :n2)
           :vor (pclass VOR :n2)
           :fc (pclass FlightControls :n2)
           :controller (pclass ControllerBoard :n2 :cn1)})
)";

}  // namespace

TEST(Sexpr, ReadsNestedForms) {
  auto forms = sexpr::read("(a [1 -2.5 +3] {:k \"v\\\"q\"}) ; trailing\n:kw");
  ASSERT_EQ(forms.size(), 2u);
  const auto& a = forms[0];
  ASSERT_EQ(a.items.size(), 3u);
  EXPECT_TRUE(a.items[0].is_symbol("a"));
  EXPECT_EQ(a.items[1].kind, sexpr::Kind::kVector);
  EXPECT_EQ(a.items[1].items[1].number, -2.5);
  EXPECT_EQ(a.items[1].items[2].number, 3.0);
  EXPECT_EQ(a.items[2].items[1].text, "v\"q");
  EXPECT_TRUE(forms[1].is_keyword("kw"));
}

TEST(Sexpr, UnbalancedDelimiterReportsLine) {
  std::string msg = message_of([] { sexpr::read("(defpclass X [a"); });
  EXPECT_NE(msg.find(":1:"), std::string::npos) << msg;
  EXPECT_EQ(code_of([] { sexpr::read("(a]"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { sexpr::read("{:a}"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { sexpr::read(")"); }), ErrorCode::kParse);
}

TEST(Pamela, ParsesClassHeaders) {
  auto defs = pamela::parse("(defpclass VOR [localnet])\n(defpclass Empty [])");
  ASSERT_EQ(defs.size(), 2u);
  EXPECT_EQ(defs[0].name, "VOR");
  EXPECT_EQ(defs[0].params, std::vector<std::string>{"localnet"});
  EXPECT_TRUE(defs[0].fields.empty());
  EXPECT_EQ(defs[1].name, "Empty");
  EXPECT_TRUE(defs[1].params.empty());
  EXPECT_EQ(defs[1].span.line, 2);
}

TEST(Pamela, RejectsElisionsAndUnknownForms) {
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass VOR [localnet] ...)"); }), ErrorCode::kUnsupported);
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass N [...])"); }), ErrorCode::kUnsupported);
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass A [] :modes {:on 1})"); }), ErrorCode::kUnsupported);
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass A [] :meta {:colour red})"); }), ErrorCode::kUnsupported);
  EXPECT_EQ(code_of([] { pamela::parse("(defthing A [])"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass A [])(defpclass A [])"); }), ErrorCode::kParse);
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass A [] :fields {:x (method y)})"); }), ErrorCode::kUnsupported);
  EXPECT_EQ(code_of([] { pamela::parse("(defpclass A [] :fields {:x (lvar \"\")})"); }), ErrorCode::kParse);
}

TEST(Pamela, InstantiationErrors) {
  EXPECT_EQ(code_of([] {
              pamela::load_model("(defpclass S [n] :meta {:kind sensor})(defpclass U [] :fields {:s (pclass S)})");
            }),
            ErrorCode::kModel);
  EXPECT_EQ(code_of([] {
              pamela::load_model("(defpclass S [n] :meta {:kind sensor})(defpclass U [] :fields {:s (pclass S :nope)})");
            }),
            ErrorCode::kReference);
  std::string cycle = message_of([] {
    pamela::load_model(
        "(defpclass A [] :fields {:b (pclass B)} :meta {:kind board})"
        "(defpclass B [] :fields {:a (pclass A)} :meta {:kind board})",
        "", std::string("A"));
  });
  EXPECT_NE(cycle.find("A -> B -> A"), std::string::npos) << cycle;
  EXPECT_EQ(code_of([] { pamela::load_model("(defpclass A [])", "", std::string("Missing")); }), ErrorCode::kModel);
}

TEST(Pamela, UseCaseListingSharesTheLocalNetwork) {
  SystemModel m = pamela::load_model(kListing, "listing.pam");
  for (const char* id : {"gps", "vor", "fc", "n2", "cn1", "controller", "controller.program", "controller.webserver"}) {
    EXPECT_TRUE(m.has_component(id)) << id;
  }
  EXPECT_EQ(m.components.size(), 8u);
  auto network_of = [&](const std::string& id) {
    std::set<std::string> out;
    for (const auto& e : m.edges) {
      if (e.src == id && e.kind == EdgeKind::kCommunicatesOver) out.insert(e.dst);
    }
    return out;
  };
  // One shared instance: identity of the network object reached from both sensors.
  ASSERT_EQ(network_of("gps").size(), 1u);
  EXPECT_EQ(network_of("gps"), network_of("vor"));
  EXPECT_EQ(&m.component(*network_of("gps").begin()), &m.component(*network_of("vor").begin()));
  EXPECT_EQ(m.component("n2").display_name(), "Local Network");
  EXPECT_TRUE(m.edges.count({"controller.program", EdgeKind::kHostedOn, "controller"}));
  EXPECT_TRUE(m.edges.count({"controller.webserver", EdgeKind::kHostedOn, "controller"}));
  EXPECT_TRUE(m.edges.count({"controller.webserver", EdgeKind::kCommunicatesOver, "cn1"}));
  // The board forwards both networks to its software.
  EXPECT_TRUE(network_of("controller").empty());
}

TEST(Pamela, LvarLabelsDecideIdentity) {
  const char* src = R"(
(defpclass Net [] :meta {:kind network})
(defpclass S [n] :meta {:kind sensor})
(defpclass Pod [] :fields {:net (lvar "bus" Net) :s (pclass S :net)})
(defpclass U [] :fields {:a (lvar "bus" Net) :b (lvar "other" Net) :c (lvar "bus")
                         :pod (pclass Pod) :s (pclass S :b)}))";
  SystemModel m = pamela::load_model(src);
  EXPECT_TRUE(m.has_component("a"));
  EXPECT_TRUE(m.has_component("b"));
  EXPECT_FALSE(m.has_component("c"));
  EXPECT_FALSE(m.has_component("pod.net"));
  EXPECT_TRUE(m.edges.count({"pod.s", EdgeKind::kCommunicatesOver, "a"}));
  EXPECT_TRUE(m.edges.count({"s", EdgeKind::kCommunicatesOver, "b"}));
}

TEST(Pamela, UntypedLvarIsAResource) {
  SystemModel m = pamela::load_model("(defpclass U [] :fields {:r (lvar \"cb\") :n 3})");
  ASSERT_TRUE(m.has_component("r"));
  EXPECT_EQ(m.component("r").class_name, "Resource");
  EXPECT_EQ(m.component("r").kind, ComponentKind::kOther);
  EXPECT_EQ(m.component("r").display_name(), "cb");
  EXPECT_EQ(m.components.size(), 1u);
}

TEST(Pamela, EmptySourceGivesEmptyModel) {
  EXPECT_TRUE(pamela::load_model("  ; nothing\n").components.empty());
}

TEST(Pamela, BundledAutopilotWiring) {
  SystemModel m = pamela::load_model(slurp(data_path("autopilot.pam")));
  EXPECT_EQ(m.components.size(), 9u);
  EXPECT_EQ(m.component("controller").display_name(), "Autopilot");
  EXPECT_EQ(m.component("cellnet").display_name(), "WAN (Cellular)");
  EXPECT_TRUE(m.edges.count({"controller.program", EdgeKind::kControls, "fc"}));
  EXPECT_TRUE(m.edges.count({"station", EdgeKind::kCommunicatesOver, "cellnet"}));
  int sensors = 0, networks = 0;
  for (const auto& [id, c] : m.components) {
    sensors += c.kind == ComponentKind::kSensor;
    networks += c.kind == ComponentKind::kNetwork;
  }
  EXPECT_EQ(sensors, 2);
  EXPECT_EQ(networks, 2);
}

TEST(Canonical, RoundTripIsIdempotentOnBundledModels) {
  for (const char* file : {"autopilot.pam", "autopilot-eval.pam"}) {
    SystemModel m = pamela::load_model(slurp(data_path(file)), file);
    std::string text = to_canonical(m);
    SystemModel back = parse_canonical(text);
    EXPECT_EQ(back, m) << file;
    EXPECT_EQ(to_canonical(back), text) << file;
  }
}

TEST(Canonical, RoundTripWithObservablesAndOddNames) {
  testkit::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    auto s = testkit::random_system(rng);
    s.model.components.begin()->second.display = "Name with \"quotes\" and spaces";
    std::string text = to_canonical(s.model);
    EXPECT_EQ(parse_canonical(text), s.model);
    EXPECT_EQ(to_canonical(parse_canonical(text)), text);
  }
}

TEST(Canonical, DigestIsSha256OfCanonicalText) {
  // sha256("abc") is a published test vector.
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  SystemModel m = pamela::load_model(slurp(data_path("autopilot.pam")));
  EXPECT_EQ(model_digest(m), "sha256:" + sha256_hex(to_canonical(m)));
}

TEST(Canonical, RejectsGarbage) {
  EXPECT_THROW(parse_canonical("not a model"), Error);
  EXPECT_THROW(parse_canonical("dcrypps-model 1\ncomponent x kind=spaceship\n"), Error);
}

TEST(Properties, NegationIsInvolutiveAndFlipsOperators) {
  auto e = PropertyExpr::compare(CompareOp::kLe, Term{"GPS.pos", std::string("VOR.pos")}, "Max");
  auto n = negate_expr(e);
  EXPECT_EQ(n.to_string(), "(> (dist GPS.pos VOR.pos) Max)");
  EXPECT_EQ(negate_expr(n), e);
  auto conj = PropertyExpr::junction(PropertyExpr::Kind::kAnd,
                                     {e, PropertyExpr::compare(CompareOp::kGe, Term{"x", std::nullopt}, "T")});
  EXPECT_EQ(negate_expr(conj).to_string(), "(or (> (dist GPS.pos VOR.pos) Max) (< x T))");
  auto doc = parse_properties("(property p :category safety :severity annoyance :expr (not (< x T)))");
  EXPECT_EQ(doc.properties[0].expression.to_string(), "(>= x T)");
}

TEST(Properties, ParsesUseCaseDocument) {
  auto doc = parse_properties(slurp(data_path("usecase.props")), "usecase.props");
  ASSERT_EQ(doc.properties.size(), 2u);
  EXPECT_EQ(doc.thresholds.at("MaximumSensorDisagreement").unit, "m");
  auto a = negate(doc.properties[0]);
  EXPECT_EQ(a.expression.to_string(), "(> (dist GPS.pos VOR.pos) MaximumSensorDisagreement)");
  EXPECT_FALSE(doc.assumptions.physical_access);
  EXPECT_TRUE(doc.assumptions.full_design_knowledge);
}

TEST(Properties, DocumentErrors) {
  EXPECT_THROW(parse_properties("(property p :category food :severity annoyance :expr (< x T))"), Error);
  EXPECT_THROW(parse_properties("(property p :category safety :severity meh :expr (< x T))"), Error);
  EXPECT_THROW(parse_properties("(property p :category safety :severity annoyance)"), Error);
  EXPECT_THROW(parse_properties("(property a+b :category safety :severity annoyance :expr (< x T))"), Error);
  EXPECT_THROW(parse_properties("(threshold T)"), Error);
  EXPECT_THROW(parse_properties("(assumptions :remote-channels [internet none])"), Error);
  EXPECT_THROW(parse_properties("(observable o :inputs [a])"), Error);
  EXPECT_THROW(parse_properties("(widget)"), Error);
}

TEST(Properties, UnresolvedNamesAreReported) {
  Inputs in;
  in.model = pamela::load_model(slurp(data_path("autopilot.pam")));
  in.properties = parse_properties(
      "(threshold T 1)(observable a :anchor controller.program)"
      "(property p :category safety :severity annoyance :expr (< (dist a ghost) U))");
  auto issues = bind_properties(in);
  ASSERT_EQ(issues.size(), 2u);
  EXPECT_NE(issues[0].message.find("ghost"), std::string::npos);
  EXPECT_NE(issues[1].message.find("'U'"), std::string::npos);

  Inputs bad;
  bad.model = in.model;
  bad.properties = parse_properties("(observable a :anchor nowhere)");
  ASSERT_EQ(bind_properties(bad).size(), 1u);
}

TEST(Properties, AttachingTwiceIsIdempotent) {
  auto in = testkit::use_case();
  auto before = in.model;
  attach_observables(in.model, in.properties);
  EXPECT_EQ(in.model, before);
  auto changed = in.properties;
  changed.observables[0].deadline = !changed.observables[0].deadline;
  EXPECT_EQ(code_of([&] { attach_observables(in.model, changed); }), ErrorCode::kConflict);
}

namespace {

std::vector<InvariantProperty> props_of(int k) {
  std::vector<InvariantProperty> out;
  for (int i = 0; i < k; ++i) {
    InvariantProperty p;
    p.id = "p" + std::string(i < 10 ? "0" : "") + std::to_string(i);
    p.category = "safety";
    p.severity = static_cast<Severity>(i % 3);
    p.expression = PropertyExpr::compare(CompareOp::kLt, Term{"x", std::nullopt}, "T");
    out.push_back(p);
  }
  return out;
}

long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(Assertions, CountsFollowBinomialSums) {
  for (int k = 0; k <= 17; ++k) {
    for (int j = 1; j <= 3; ++j) {
      long long expected = 0;
      for (int s = 1; s <= std::min(j, k); ++s) expected += binomial(k, s);
      EXPECT_EQ(static_cast<long long>(enumerate_assertions(props_of(k), j).size()), expected) << k << " " << j;
    }
  }
  EXPECT_EQ(enumerate_assertions(props_of(17), 2).size(), 153u);
  EXPECT_EQ(enumerate_assertions(props_of(2), 2).size(), 3u);
  EXPECT_THROW(enumerate_assertions(props_of(2), 0), Error);
}

TEST(Assertions, JointViolationConjoinsNegations) {
  auto doc = parse_properties(slurp(data_path("usecase.props")));
  auto all = enumerate_assertions(doc.properties, 2);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].id, "on-trajectory+sensor-agreement");
  EXPECT_EQ(all[2].expression.to_string(),
            "(and (> distance-from-trajectory MaximumOffTrajectory) "
            "(> (dist GPS.pos VOR.pos) MaximumSensorDisagreement))");
  EXPECT_EQ(all[2].violated.size(), 2u);
}

TEST(Assertions, OrderedBySeverityThenId) {
  auto all = enumerate_assertions(props_of(6), 1);
  for (std::size_t i = 1; i < all.size(); ++i) {
    auto a = all[i - 1], b = all[i];
    EXPECT_TRUE(a.severity > b.severity || (a.severity == b.severity && a.id < b.id));
  }
}

TEST(AttackKb, BuiltinMatchesShippedFile) {
  const auto& kb = builtin_kb();
  EXPECT_EQ(kb.size(), 10u);
  EXPECT_EQ(kb_to_json(kb), kb_to_json(parse_kb(slurp(data_path("attack_kb.json")))));
  std::set<std::string> ids;
  for (const auto& a : kb) ids.insert(a.id);
  EXPECT_EQ(ids, (std::set<std::string>{"physical-tamper", "spoof-via-concentrator", "spoof-via-mitm",
                                         "timing-job-flood", "timing-network-saturation", "timing-process-load",
                                         "tfm-numeric-sensitivity", "tfm-open-ports", "tfm-protocol-overflow",
                                         "tfm-web-management"}));
  EXPECT_EQ(load_kb("builtin").size(), 10u);
}

TEST(AttackKb, LikelihoodDefaults) {
  const auto& kb = builtin_kb();
  EXPECT_EQ(find_attack(kb, "spoof-via-mitm")->base_likelihood, 0.30);
  EXPECT_EQ(find_attack(kb, "tfm-web-management")->base_likelihood, 0.20);
  EXPECT_EQ(find_attack(kb, "timing-job-flood")->base_likelihood, 0.10);
  EXPECT_EQ(find_attack(kb, "tfm-numeric-sensitivity")->base_likelihood, 0.05);
  EXPECT_TRUE(find_attack(kb, "physical-tamper")->applicability.requires_physical_access);
}

TEST(AttackKb, SchemaErrors) {
  EXPECT_TRUE(parse_kb("").empty());
  EXPECT_TRUE(parse_kb("  \n").empty());
  EXPECT_TRUE(parse_kb("[]").empty());
  auto one = kb_to_json({*find_attack(builtin_kb(), "tfm-protocol-overflow")});
  auto dup = one;
  dup["attacks"].push_back(dup["attacks"][0]);
  std::string msg = message_of([&] { parse_kb(dup.dump()); });
  EXPECT_NE(msg.find("duplicate attack id 'tfm-protocol-overflow'"), std::string::npos) << msg;

  auto bad = one;
  bad["attacks"][0]["base_likelihood"] = 1.5;
  msg = message_of([&] { parse_kb(bad.dump()); });
  EXPECT_NE(msg.find("base_likelihood"), std::string::npos) << msg;

  bad = one;
  bad["attacks"][0]["requirement_template"] = "Protect {peer}.";
  EXPECT_EQ(code_of([&] { parse_kb(bad.dump()); }), ErrorCode::kSchema);

  bad = one;
  bad["attacks"][0]["applicability"] = ojson::object();
  EXPECT_EQ(code_of([&] { parse_kb(bad.dump()); }), ErrorCode::kSchema);

  bad = one;
  bad["attacks"][0]["surprise"] = true;
  EXPECT_EQ(code_of([&] { parse_kb(bad.dump()); }), ErrorCode::kSchema);

  EXPECT_EQ(code_of([&] { parse_kb("{not json"); }), ErrorCode::kSchema);
}

TEST(AttackKb, JsonRoundTrip) {
  auto j = kb_to_json(builtin_kb());
  EXPECT_EQ(kb_to_json(parse_kb(j.dump())), j);
}
