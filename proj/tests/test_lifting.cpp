#include <algorithm>
#include <random>

#include "doctest.h"
#include "tlforge/lifting.hpp"

using namespace tlforge;

namespace {

LiftErrorKind lift_error(std::vector<std::string> tokens, std::vector<int> labels, int max_label = 5) {
  try {
    lift(tokens, labels, max_label);
  } catch (const LiftError& e) {
    return e.kind();
  }
  FAIL("expected LiftError");
  return LiftErrorKind::kMissingAp;
}

}  // namespace

TEST_CASE("lift the two-room sentence") {
  const auto tokens = split_words("Go to the red room and push the box into the green room .");
  const std::vector<int> labels{0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 2, 2, 0};
  const LiftResult r = lift(tokens, labels);
  CHECK(r.lifted_nl == "Go to the prop_1 and push the box into the prop_2 .");
  CHECK(r.ap_map == ApMap{{1, "red room"}, {2, "green room"}});
}

TEST_CASE("lift edge cases") {
  const auto tokens = split_words("wait here .");
  const LiftResult none = lift(tokens, std::vector<int>{0, 0, 0});
  CHECK(none.lifted_nl == "wait here .");
  CHECK(none.ap_map.empty());
  CHECK(lift(std::vector<std::string>{}, std::vector<int>{}).lifted_nl.empty());

  // co-reference keeps the first surface
  const auto coref = split_words("visit the Red Room then the room again");
  const LiftResult c = lift(coref, std::vector<int>{0, 0, 1, 1, 0, 0, 1, 0});
  CHECK(c.lifted_nl == "visit the prop_1 then the prop_1 again");
  CHECK(c.ap_map == ApMap{{1, "Red Room"}});

  // adjacent spans with different ids stay separate
  const LiftResult adj = lift(split_words("a b c"), std::vector<int>{1, 2, 2});
  CHECK(adj.lifted_nl == "prop_1 prop_2");
}

TEST_CASE("lift errors") {
  CHECK(lift_error({"a", "b"}, {2, 1}) == LiftErrorKind::kNonContiguousIds);
  CHECK(lift_error({"a", "b"}, {0, 2}) == LiftErrorKind::kNonContiguousIds);
  CHECK(lift_error({"a"}, {-1}) == LiftErrorKind::kLabelOutOfRange);
  CHECK(lift_error({"a", "b", "c", "d", "e", "f"}, {1, 2, 3, 4, 5, 6}) == LiftErrorKind::kLabelOutOfRange);
  CHECK_NOTHROW(lift(split_words("a b c d e f"), std::vector<int>{1, 2, 3, 4, 5, 6}, 15));
  CHECK(lift_error({"a", "b"}, {0}) == LiftErrorKind::kLengthMismatch);
}

TEST_CASE("unlift examples") {
  const Formula f = parse_formula("◇ ( prop_1 ∧ ◇ prop_2 )");
  CHECK(unlift(f, {{1, "red room"}, {2, "green room"}}) == "◇ ( red_room ∧ ◇ green_room )");
  CHECK(unlift(f, {{1, "red room"}, {2, "green room"}}, TextStyle::kAscii) == "F LPAREN red_room AND F green_room RPAREN");
  CHECK(unlift(Formula::Prop(1), {{1, "A"}}) == "a");
  CHECK(unlift(Formula::Prop(1), {{1, "  Big   Blue Box "}}) == "big_blue_box");
  try {
    unlift(Formula::Prop(2), {{1, "x"}});
    FAIL("expected MissingAP");
  } catch (const LiftError& e) {
    CHECK(e.kind() == LiftErrorKind::kMissingAp);
    CHECK(std::string(e.what()).rfind("MissingAP(2)", 0) == 0);
  }
}

TEST_CASE("grounded text parses back through the atom table") {
  const ApMap m{{1, "red room"}, {2, "green room"}};
  const Formula f = parse_formula("( prop_1 ∪ □ ¬ prop_2 )");
  CHECK(ast_equal(parse_formula(unlift(f, m), TlVocab(), grounding_atoms(m)), f));
}

// Any injective renumbering of the ids that keeps spans and co-reference
// gives the same lift after canonicalization.
TEST_CASE("lift is invariant under relabeling") {
  std::mt19937_64 rng(4);
  const auto tokens = split_words("go to a b then c d and e then a b again or f");
  const std::vector<int> gold{0, 0, 1, 1, 0, 2, 2, 0, 3, 0, 1, 1, 0, 0, 4};
  const LiftResult ref = lift(tokens, gold);
  std::vector<int> perm{1, 2, 3, 4, 5, 6, 7, 8, 9};
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> relabeled;
    for (int l : gold) relabeled.push_back(l == 0 ? 0 : perm[l - 1]);
    CHECK(labels_well_formed(relabeled, 15) == (relabeled == gold));
    const std::vector<int> canon = canonicalize_labels(relabeled);
    CHECK(canon == gold);
    const LiftResult r = lift(tokens, canon);
    CHECK(r.lifted_nl == ref.lifted_nl);
    CHECK(r.ap_map == ref.ap_map);
  }
}

TEST_CASE("word helpers") {
  CHECK(split_words("  a\tb \n c ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(join_words(split_words("x  y")) == "x y");
  CHECK(canonical_ap_name("Red Room") == "red_room");
  CHECK(labels_well_formed(std::vector<int>{0, 1, 0, 2, 1}, 5));
  CHECK_FALSE(labels_well_formed(std::vector<int>{0, 2}, 5));
  CHECK_FALSE(labels_well_formed(std::vector<int>{1, 2}, 1));
}
