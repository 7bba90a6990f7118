#include <doctest.h>

#include "../support/oracles.hpp"

using namespace nsp;

namespace {

std::set<std::string> names_up_to(const PredicateTable& t, std::size_t stratum) {
  std::set<std::string> out;
  for (const auto& d : t.decls()) {
    if (!d.is_derived()) out.insert(d.name);
  }
  for (std::size_t k = 0; k <= stratum && k < t.strata().size(); ++k) out.insert(t.strata()[k].begin(), t.strata()[k].end());
  return out;
}

}  // namespace

TEST_CASE("semi-naive closure equals naive closure and is idempotent") {
  oracle::Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const auto inst = oracle::random_derived_instance(rng, 6);
    const auto s = oracle::random_atoms(rng, inst.primitives, inst.objects, 0.4);
    const auto closed = close_derived(s, inst.table, inst.objects);
    CHECK(closed == close_derived_naive(s, inst.table, inst.objects));
    CHECK(close_derived(closed, inst.table, inst.objects) == closed);
    CHECK(primitive_atoms(closed, inst.table) == s);
  }
}

TEST_CASE("lower strata do not depend on higher strata") {
  oracle::Rng rng(22);
  for (int k = 0; k < 100; ++k) {
    const auto inst = oracle::random_derived_instance(rng, 5);
    const auto s = oracle::random_atoms(rng, inst.primitives, inst.objects, 0.4);
    const auto full = close_derived(s, inst.table, inst.objects);
    for (std::size_t st = 0; st < inst.table.strata().size(); ++st) {
      const auto names = names_up_to(inst.table, st);
      const auto sub = inst.table.subset(names, inst.types);
      CHECK(close_derived(s, sub, inst.objects) == oracle::project(full, names));
    }
  }
}

TEST_CASE("transitive closure template derives reachability") {
  const auto types = oracle::two_types();
  const auto table = PredicateTable::build(
      parse_predicates(oracle::primitive_source(oracle::primitive_vocabulary()) +
                       "(derived Reach (?x a) (?y a) (or (holds P3 ?x ?y) (exists (?z a) (and (holds P3 ?x ?z) "
                       "(holds Reach ?z ?y)))))\n"),
      types);
  std::vector<Object> objs{{"o0", "a", 0}, {"o1", "a", 1}, {"o2", "a", 2}, {"o3", "a", 3}};
  const AtomSet s{{"P3", {0, 1}}, {"P3", {1, 2}}, {"P3", {2, 3}}};
  const auto closed = close_derived(s, table, objs);
  std::size_t reach = 0;
  for (const auto& a : closed) reach += a.predicate == "Reach";
  CHECK(reach == 6);
  CHECK(closed.count({"Reach", {0, 3}}));
  CHECK_FALSE(closed.count({"Reach", {3, 0}}));
}

TEST_CASE("apply with empty effects is the identity and respects the frame") {
  oracle::Rng rng(23);
  HLA noop;
  noop.name = "Noop";
  noop.skill = {"Go", {"a"}};
  for (int k = 0; k < 200; ++k) {
    const auto inst = oracle::random_derived_instance(rng, 6);
    const AbstractState s{close_derived(oracle::random_atoms(rng, inst.primitives, inst.objects, 0.4), inst.table,
                                        inst.objects),
                          true};
    GroundHLA empty;
    empty.hla = &noop;
    const auto same = apply(s, empty, inst.table, inst.objects);
    REQUIRE(same);
    CHECK(*same == s);

    const auto prim = primitive_atoms(s.atoms, inst.table);
    GroundHLA g;
    g.hla = &noop;
    for (const auto& a : prim) {
      if (oracle::coin(rng, 0.2)) g.pre.insert(a);
      if (oracle::coin(rng, 0.2)) g.del.insert(a);
    }
    for (const auto& a : oracle::random_atoms(rng, inst.primitives, inst.objects, 0.15)) {
      if (!g.del.count(a)) g.add.insert(a);
    }
    const auto next = apply(s, g, inst.table, inst.objects);
    REQUIRE(next);
    AtomSet expected;
    for (const auto& a : prim) {
      if (!g.del.count(a)) expected.insert(a);
    }
    expected.insert(g.add.begin(), g.add.end());
    CHECK(primitive_atoms(next->atoms, inst.table) == expected);
    CHECK(next->atoms == close_derived_naive(expected, inst.table, inst.objects));

    GroundHLA blocked = g;
    blocked.pre.insert({"P0", {999}});
    CHECK_FALSE(apply(s, blocked, inst.table, inst.objects));
  }
}
