#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "ikalab/attacker.hpp"
#include "ikalab/errors.hpp"
#include "ikalab/party.hpp"
#include "oracles.hpp"

using namespace ikalab;

namespace {

SetPoint r(std::uint64_t v) { return SetPoint::residue(v); }

std::vector<SetPoint> residues(std::initializer_list<std::uint64_t> values) {
  std::vector<SetPoint> out;
  for (const auto v : values) out.push_back(r(v));
  return out;
}

// Users on a network with the attacker in control of U_{n-1} and U_n.
struct AttackRun {
  AttackRun(const ActionParams& params, const std::vector<std::uint64_t>& g, AttackerOptions options)
      : action(params), net(static_cast<std::uint32_t>(g.size())) {
    const auto n = static_cast<std::uint32_t>(g.size());
    for (std::uint32_t i = 1; i <= n; ++i) {
      users.push_back(std::make_unique<HonestParty>(action, net, PartyId{i}, n, action.scalar(g[i - 1])));
    }
    attacker = std::make_unique<Attacker>(action, net, options);
  }

  void run_ika() {
    users[0]->start();
    net.run_until_quiescent();
  }

  const ParticipantState& user(std::uint32_t i) const { return users[i - 1]->state(); }

  GroupAction action;
  Network net;
  std::vector<std::unique_ptr<HonestParty>> users;
  std::unique_ptr<Attacker> attacker;
};

AttackerOptions fixed_ghat(std::uint64_t ghat) {
  AttackerOptions options;
  options.ghat = GroupScalar{ghat};
  return options;
}

}  // namespace

TEST(AttackReference, EveryoneHoldsKeyFour) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  run.run_ika();
  ASSERT_TRUE(run.attacker->attack_complete());
  EXPECT_EQ(run.attacker->state().attack_key, r(4));
  for (std::uint32_t i = 1; i <= 3; ++i) {
    EXPECT_EQ(run.user(i).key, r(4)) << "U" << i;
    EXPECT_TRUE(run_checks(run.user(i)).all_pass()) << "U" << i;
    EXPECT_TRUE(run.users[i - 1]->violations().empty());
  }
}

TEST(AttackReference, ForgedValues) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  run.run_ika();
  const Transcript& t = run.net.transcript();
  std::vector<SetPoint> d;
  for (const auto& e : t) {
    if (e.annotation == "(d)") d.push_back(std::get<BroadcastMsg>(e.message).value);
  }
  EXPECT_EQ(d, residues({13}));  // 7 . C_2 = 2^(7*12) mod 23
  EXPECT_EQ(run.user(3).memory, residues({16, 9, 13}));
  EXPECT_EQ(run.user(1).memory, residues({3, 18, 9}));
  EXPECT_EQ(run.user(2).memory, residues({3, 18, 2}));
}

TEST(AttackReference, AttackerStepsAreAnnotated) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  run.run_ika();
  std::vector<std::string> steps;
  for (const auto& e : run.net.transcript()) {
    if (e.kind != EntryKind::delivered && (steps.empty() || steps.back() != e.annotation)) {
      steps.push_back(e.annotation);
    }
  }
  // (e) to U_n comes after (d); n = 3 has no decoys, only C_1 and C_2.
  EXPECT_EQ(steps, (std::vector<std::string>{"(a)", "(b)", "(c)", "(d)", "(e)", "(f)", "(g)", "(h)", "(i)"}));
}

// Memories after the attack match the table of closed forms, with E_k from
// the naive oracle and the decoys read back from the attacker.
class MemoryTable : public ::testing::TestWithParam<const char*> {};

TEST_P(MemoryTable, MatchesClosedForms) {
  const auto params = ActionParams::preset(GetParam());
  const oracle::ActionOracle o(params);
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::uint64_t> scalar(2, o.q() - 1);
  for (std::uint32_t n = 3; n <= 10; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      std::vector<std::uint64_t> g(n);
      for (auto& v : g) v = scalar(gen);
      AttackerOptions options;
      options.seed = seed;
      AttackRun run(params, g, options);
      run.run_ika();
      ASSERT_TRUE(run.attacker->attack_complete());
      const std::uint64_t ghat = run.attacker->state().ghat->value;
      ASSERT_NE(ghat, 1u);

      std::vector<SetPoint> ghat_e;
      for (std::uint32_t k = 1; k < n; ++k) {
        std::vector<std::uint64_t> others;
        for (std::uint32_t j = 1; j <= n; ++j) {
          if (j != k) others.push_back(g[j - 1]);
        }
        others.push_back(ghat);
        ghat_e.push_back(o.act(o.product(others), o.base()));
      }
      auto low = ghat_e;
      low.push_back(o.C(g, n));
      auto penultimate = ghat_e;
      penultimate.push_back(o.E(g, n));
      std::vector<SetPoint> last;
      for (const auto& m : run.attacker->state().decoys) last.push_back(o.act(g[n - 1], m));
      last.push_back(o.E(g, n - 1));
      last.push_back(o.C(g, n));
      std::vector<std::uint64_t> with_ghat(g.begin(), g.end() - 1);
      with_ghat.push_back(ghat);
      last.push_back(o.act(o.product(with_ghat), o.base()));

      const std::string where = "n=" + std::to_string(n) + " seed=" + std::to_string(seed);
      for (std::uint32_t i = 1; i <= n - 2; ++i) ASSERT_EQ(run.user(i).memory, low) << where << " U" << i;
      ASSERT_EQ(run.user(n - 1).memory, penultimate) << where;
      ASSERT_EQ(run.user(n).memory, last) << where;
      ASSERT_EQ(run.attacker->state().decoys.size(), n - 3);

      std::vector<std::uint64_t> all = g;
      all.push_back(ghat);
      const SetPoint expected = o.act(o.product(all), o.base());
      ASSERT_EQ(run.attacker->state().attack_key, expected) << where;
      for (std::uint32_t i = 1; i <= n; ++i) ASSERT_EQ(run.user(i).key, expected) << where << " U" << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Presets, MemoryTable, ::testing::Values("modexp", "elliptic"));

TEST(GhatIdentity, ChecksExposeTheAttack) {
  for (const char* preset : {"modexp", "elliptic"}) {
    for (std::uint32_t n = 3; n <= 7; ++n) {
      std::vector<std::uint64_t> g;
      for (std::uint32_t i = 0; i < n; ++i) g.push_back(2 + (3 * i + 1) % 8);
      AttackRun run(ActionParams::preset(preset), g, fixed_ghat(1));
      run.run_ika();
      EXPECT_EQ(run_checks(run.user(n)).v2, false) << preset << " n=" << n;
      for (std::uint32_t i = 1; i <= n - 2; ++i) {
        EXPECT_EQ(run_checks(run.user(i)).v3, false) << preset << " n=" << n << " U" << i;
      }
    }
  }
}

TEST(ExitReference, TwoRoundsRestoreConsistency) {
  AttackerOptions options = fixed_ghat(7);
  options.hhat = GroupScalar{2};
  options.fhat = GroupScalar{3};
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, options);
  run.run_ika();

  run.net.set_stage("exit-1");
  run.attacker->forge_exit_round1();
  run.net.run_until_quiescent();
  EXPECT_EQ(run.user(1).memory, residues({9, 18, 6}));
  for (std::uint32_t i = 1; i <= 3; ++i) EXPECT_EQ(run.user(i).key, r(16)) << "U" << i;
  EXPECT_EQ(run.attacker->state().current_key, r(16));

  run.net.set_stage("exit-2");
  run.attacker->forge_exit_round2();
  run.net.run_until_quiescent();
  for (std::uint32_t i = 1; i <= 3; ++i) {
    EXPECT_EQ(run.user(i).key, r(2)) << "U" << i;
    EXPECT_EQ(run.user(i).memory, residues({16, 8, 6})) << "U" << i;
    EXPECT_EQ(run_checks(run.user(i)).v4, true) << "U" << i;
    EXPECT_EQ(run.user(i).refresh_checks.size(), 2u);
  }
  EXPECT_EQ(run.attacker->state().current_key, r(2));
}

TEST(ExitStrategy, RoundsFollowClosedFormsOnBothBackends) {
  for (const char* preset : {"modexp", "elliptic"}) {
    const auto params = ActionParams::preset(preset);
    const oracle::ActionOracle o(params);
    for (std::uint32_t n = 3; n <= 8; ++n) {
      std::vector<std::uint64_t> g;
      for (std::uint32_t i = 0; i < n; ++i) g.push_back(2 + (5 * i + 2) % (o.q() - 2));
      AttackerOptions options;
      options.seed = n;
      AttackRun run(params, g, options);
      run.run_ika();
      run.attacker->forge_exit_round1();
      run.net.run_until_quiescent();
      const auto& st = run.attacker->state();
      std::vector<std::uint64_t> f = g;
      f.push_back(st.ghat->value);
      f.push_back(st.hhat->value);
      for (std::uint32_t i = 1; i <= n; ++i) ASSERT_EQ(run.user(i).key, o.act(o.product(f), o.base()));
      run.attacker->forge_exit_round2();
      run.net.run_until_quiescent();
      f.push_back(st.fhat->value);
      for (std::uint32_t i = 1; i <= n; ++i) {
        ASSERT_EQ(run.user(i).key, o.act(o.product(f), o.base())) << preset << " n=" << n;
        ASSERT_EQ(run.user(i).memory, run.user(1).memory);
        ASSERT_EQ(run_checks(run.user(i)).v4, true);
      }
    }
  }
}

TEST(MitmReference, TwoKeysFromBothSides) {
  AttackerOptions options = fixed_ghat(7);
  options.mitm_hhat = GroupScalar{2};
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, options);
  run.run_ika();
  run.attacker->arm_mitm();
  run.users[0]->initiate_refresh(run.action.scalar(6));
  run.net.run_until_quiescent();

  const auto& outcome = run.attacker->mitm_outcome();
  ASSERT_TRUE(outcome.has_value());
  EXPECT_EQ(outcome->initiator, PartyId{1});
  EXPECT_EQ(outcome->key_with_group, r(2));
  EXPECT_EQ(outcome->key_with_last, r(12));
  EXPECT_EQ(run.user(1).key, r(2));
  EXPECT_EQ(run.user(2).key, r(2));
  EXPECT_EQ(run.user(3).key, r(12));

  const oracle::ActionOracle o(ActionParams::preset("modexp"));
  EXPECT_EQ(o.act(o.product({7, 6, 3, 4, 5}), o.base()), r(2));
  EXPECT_EQ(o.act(o.product({2, 3, 4, 5}), o.base()), r(12));
}

TEST(MitmReference, PenultimateInitiatorLocksAttackerOut) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  run.run_ika();
  run.attacker->arm_mitm();
  run.users[1]->initiate_refresh(run.action.scalar(6));
  run.net.run_until_quiescent();

  const auto& outcome = run.attacker->mitm_outcome();
  ASSERT_TRUE(outcome.has_value());
  EXPECT_TRUE(outcome->key_lost);
  const oracle::ActionOracle o(ActionParams::preset("modexp"));
  const SetPoint expected = o.act(o.product({6, 3, 4, 5, 7}), o.base());
  for (std::uint32_t i = 1; i <= 3; ++i) EXPECT_EQ(run.user(i).key, expected) << "U" << i;
  EXPECT_NE(run.attacker->state().current_key, expected);
}

TEST(MitmReference, NoConversionForLastUser) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  run.run_ika();
  run.attacker->arm_mitm();
  run.users[2]->initiate_refresh(run.action.scalar(6));
  EXPECT_THROW(run.net.run_until_quiescent(), SequencingError);
}

TEST(Sequencing, StepsOutOfOrderAreRefused) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  EXPECT_THROW(run.attacker->require_complete(), SequencingError);
  EXPECT_THROW(run.attacker->forge_exit_round1(), SequencingError);
  EXPECT_THROW(run.attacker->forge_exit_round2(), SequencingError);
  EXPECT_THROW(run.attacker->arm_mitm(), SequencingError);

  AttackerState empty;
  empty.n = 3;
  EXPECT_THROW(step_i_lists(run.action, empty), SequencingError);
  EXPECT_THROW(compute_attack_key(run.action, empty), SequencingError);
  EXPECT_THROW(exit_round2_list(run.action, empty), SequencingError);

  run.run_ika();
  Rng filler(0, stream::kAttackerFiller);
  const RefreshMsg from_penultimate{PartyId{2}, residues({3, 18, 2})};
  EXPECT_THROW(convert_to_mitm(run.action, run.attacker->state(), from_penultimate, GroupScalar{2}, filler),
               SequencingError);
  EXPECT_THROW(mitm_apply_ghat(run.action, run.attacker->state(), RefreshMsg{PartyId{1}, residues({3, 18, 9})}),
               SequencingError);

  run.attacker->forge_exit_round1();
  EXPECT_THROW(run.attacker->forge_exit_round1(), SequencingError);
}

TEST(Sequencing, UnexpectedTrafficNamesTheStep) {
  AttackRun run(ActionParams::preset("modexp"), {3, 4, 5}, fixed_ghat(7));
  run.net.unicast(Endpoint::party(PartyId{1}), Endpoint::party(PartyId{3}), ResponseMsg{PartyId{1}, r(16)});
  try {
    run.net.run_until_quiescent();
    FAIL() << "no SequencingError";
  } catch (const SequencingError& e) {
    EXPECT_NE(std::string(e.what()).find("(a)"), std::string::npos) << e.what();
  }
}

TEST(AttackerScalars, SeededDrawsAvoidCollisions) {
  const GroupAction action(ActionParams::preset("modexp"));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    // c_prev = 4 . c_last forbids ghat = 4.
    const GroupScalar ghat = select_ghat(action, seed, r(8), action.act(action.scalar(4), r(8)));
    EXPECT_NE(ghat.value, 4u);
    EXPECT_NE(ghat.value, 1u);
    for (const auto& m : draw_decoys(action, seed, 5, r(13))) EXPECT_NE(m, r(13));
    AttackerOptions options;
    options.seed = seed;
    const GroupScalar h = mitm_scalar(action, options, r(9), action.act(action.scalar(3), r(9)));
    EXPECT_NE(h.value, 3u);
  }
  AttackerOptions fixed;
  fixed.mitm_hhat = GroupScalar{3};
  EXPECT_EQ(mitm_scalar(action, fixed, r(9), action.act(action.scalar(3), r(9))).value, 3u);
}
