#include <doctest.h>

#include <random>

#include "gridsoc/graph.hpp"

using namespace gridsoc;

namespace {

NodeModel battery_like_node(const std::string& name) {
  NodeModel node(name);
  const int soc = node.add_variable("soc", 0.0, 50.0);
  const int pch = node.add_variable("pch", 0.0, 10.0);
  LinExpr cap = LinExpr::of(soc, -1.0, 50.0);
  node.add_constraint(std::move(cap), Sense::Geq);
  node.add_objective(1, LinExpr::of(pch, 0.5));
  return node;
}

}  // namespace

TEST_CASE("adding a node registers its variables") {
  ModelGraph graph;
  NodeModel node("n");
  node.add_variable("x", 0.0, 1.0);
  graph.add_node(std::move(node));
  CHECK(graph.num_nodes() == 1);
  CHECK(graph.num_variables() == 1);
}

TEST_CASE("thirty component nodes per hour over eight hours gives 240 nodes") {
  ModelGraph graph;
  for (int t = 0; t < 8; ++t) {
    for (int k = 0; k < 30; ++k) {
      graph.add_node(battery_like_node("component" + std::to_string(k)));
    }
  }
  CHECK(graph.num_nodes() == 240);
}

TEST_CASE("node constraints must reference the node's own variables") {
  ModelGraph graph;
  NodeModel node("bad");
  node.add_variable("x");
  node.add_constraint(LinExpr::of(3, 1.0), Sense::Eq);  // variable 3 does not exist
  CHECK_THROWS_AS(graph.add_node(std::move(node)), std::invalid_argument);
}

TEST_CASE("links span at least two nodes and existing variables") {
  ModelGraph graph;
  const NodeHandle a = graph.add_node(battery_like_node("h1"));
  const NodeHandle b = graph.add_node(battery_like_node("h2"));

  // state-of-charge continuity between consecutive hours
  LinkConstraint soc_link;
  soc_link.terms = {{b, 0, 1.0}, {a, 0, -1.0}, {b, 1, -0.8}};
  const EdgeHandle edge = graph.add_link(std::move(soc_link));
  CHECK(edge.id == 0);

  LinkConstraint ramp;  // inequality edge
  ramp.terms = {{b, 1, -1.0}, {a, 1, 1.0}};
  ramp.constant = 5.0;
  ramp.sense = Sense::Geq;
  graph.add_link(std::move(ramp));
  CHECK(graph.num_links() == 2);

  LinkConstraint single;
  single.terms = {{a, 0, 1.0}, {a, 1, -1.0}};
  CHECK_THROWS_AS(graph.add_link(std::move(single)), std::invalid_argument);

  LinkConstraint dangling;
  dangling.terms = {{a, 0, 1.0}, {{7}, 0, -1.0}};
  CHECK_THROWS_AS(graph.add_link(std::move(dangling)), std::invalid_argument);
}

TEST_CASE("flatten of one bounded variable emits two bound rows") {
  ModelGraph graph;
  NodeModel node("n");
  node.add_variable("x", 0.0, 1.0);
  node.add_objective(1, LinExpr::of(0, 1.0));
  graph.add_node(std::move(node));

  const FlattenResult flat = graph.flatten();
  CHECK(flat.program.num_vars() == 1);
  CHECK(flat.program.num_rows() == 2);
  for (const Cone& cone : flat.program.cones) {
    CHECK(cone.type == ConeType::NonNegative);
  }
  CHECK(flat.program.c[0] == 1.0);
  CHECK(flat.index.columns[0].lower_bound_row >= 0);
  CHECK(flat.index.columns[0].upper_bound_row >= 0);
}

TEST_CASE("an equality link becomes a zero-cone row over two columns") {
  ModelGraph graph;
  NodeModel n1("a"), n2("b");
  n1.add_variable("x");
  n2.add_variable("y");
  const NodeHandle h1 = graph.add_node(std::move(n1));
  const NodeHandle h2 = graph.add_node(std::move(n2));
  LinkConstraint link;
  link.terms = {{h1, 0, 1.0}, {h2, 0, -1.0}};
  graph.add_link(std::move(link));

  const FlattenResult flat = graph.flatten();
  CHECK(flat.program.num_rows() == 1);
  CHECK(flat.program.cones.size() == 1);
  CHECK(flat.program.cones[0].type == ConeType::Zero);
  CHECK(flat.program.A.nonZeros() == 2);
}

TEST_CASE("graphs freeze after flatten") {
  ModelGraph graph;
  graph.add_node(battery_like_node("n"));
  (void)graph.flatten();
  CHECK(graph.frozen());
  CHECK_THROWS_AS(graph.add_node(battery_like_node("m")), std::logic_error);

  ModelGraph empty;
  CHECK_THROWS_AS(empty.flatten(), std::invalid_argument);
}

TEST_CASE("flatten is deterministic") {
  const auto build = [] {
    ModelGraph graph(2);
    std::vector<NodeHandle> handles;
    for (int i = 0; i < 6; ++i) handles.push_back(graph.add_node(battery_like_node("n")));
    for (int i = 0; i + 1 < 6; ++i) {
      LinkConstraint link;
      link.terms = {{handles[i], 0, 1.0}, {handles[i + 1], 0, -1.0}};
      graph.add_link(std::move(link));
    }
    return graph;
  };
  const ModelGraph g = build();
  const FlattenResult a = g.flatten(std::vector<double>{1.0, 0.0});
  const FlattenResult b = g.flatten(std::vector<double>{1.0, 0.0});
  CHECK(a.program.b == b.program.b);
  CHECK(a.program.c == b.program.c);
  CHECK(Eigen::MatrixXd(a.program.A) == Eigen::MatrixXd(b.program.A));
  for (std::size_t i = 0; i < a.index.columns.size(); ++i) {
    CHECK(a.index.columns[i].node == b.index.columns[i].node);
    CHECK(a.index.columns[i].var == b.index.columns[i].var);
  }
}

TEST_CASE("flattening is lossless: rows evaluate like their source expressions") {
  std::mt19937 rng(41);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> var_count(1, 4);

  for (int trial = 0; trial < 20; ++trial) {
    ModelGraph graph;
    std::vector<NodeHandle> handles;
    std::vector<std::vector<NodeConstraint>> originals;
    const int nodes = 3 + static_cast<int>(rng() % 3);
    for (int n = 0; n < nodes; ++n) {
      NodeModel node("n" + std::to_string(n));
      const int nv = var_count(rng);
      for (int v = 0; v < nv; ++v) node.add_variable("x" + std::to_string(v));
      std::vector<NodeConstraint> cons;
      for (int c = 0; c < 2; ++c) {
        LinExpr expr;
        expr.constant = normal(rng);
        for (int v = 0; v < nv; ++v) expr.add(v, normal(rng));
        cons.push_back({expr, c == 0 ? Sense::Eq : Sense::Geq});
        node.add_constraint(expr, cons.back().sense);
      }
      originals.push_back(std::move(cons));
      handles.push_back(graph.add_node(std::move(node)));
    }
    LinkConstraint link;
    link.terms = {{handles[0], 0, normal(rng)}, {handles[1], 0, normal(rng)}};
    link.constant = normal(rng);
    graph.add_link(link);

    const FlattenResult flat = graph.flatten();
    Eigen::VectorXd x(flat.program.num_vars());
    for (int i = 0; i < x.size(); ++i) x[i] = normal(rng);
    const Eigen::VectorXd s = flat.program.b - flat.program.A * x;

    // node rows, in emission order
    int row = 0;
    for (int n = 0; n < nodes; ++n) {
      const std::size_t nv = graph.node(handles[n]).variables().size();
      std::vector<double> local(nv);
      for (std::size_t v = 0; v < nv; ++v) {
        local[v] = x[flat.index.column(handles[n], static_cast<int>(v))];
      }
      for (const NodeConstraint& c : originals[n]) {
        const double direct = evaluate(c.expr, local);
        CHECK(s[row] == doctest::Approx(direct).epsilon(1e-12));
        CHECK(flat.index.rows[row].source == IndexMap::RowSource::Node);
        ++row;
      }
    }
    // link row
    double direct = link.constant;
    for (const LinkTerm& term : link.terms) {
      direct += term.coeff * x[flat.index.column(term.node, term.var)];
    }
    CHECK(s[row] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(flat.index.rows[row].source == IndexMap::RowSource::Link);
  }
}

TEST_CASE("removing an edge changes only that edge's rows") {
  const auto build = [](bool with_second_link) {
    ModelGraph graph;
    std::vector<NodeHandle> handles;
    for (int i = 0; i < 3; ++i) handles.push_back(graph.add_node(battery_like_node("n")));
    LinkConstraint first;
    first.terms = {{handles[0], 0, 1.0}, {handles[1], 0, -1.0}};
    graph.add_link(std::move(first));
    if (with_second_link) {
      LinkConstraint second;
      second.terms = {{handles[1], 1, 1.0}, {handles[2], 1, -1.0}};
      graph.add_link(std::move(second));
    }
    return graph.flatten();
  };
  const FlattenResult full = build(true);
  const FlattenResult reduced = build(false);

  // rows not attributed to link 1 are identical
  int slim_row = 0;
  for (int row = 0; row < full.program.num_rows(); ++row) {
    const auto& info = full.index.rows[row];
    if (info.source == IndexMap::RowSource::Link && info.id == 1) continue;
    CHECK(full.program.b[row] == reduced.program.b[slim_row]);
    CHECK((Eigen::RowVectorXd(full.program.A.row(row)) ==
           Eigen::RowVectorXd(reduced.program.A.row(slim_row))));
    ++slim_row;
  }
  CHECK(slim_row == reduced.program.num_rows());
}

TEST_CASE("binary variables pass through flatten with their priorities") {
  ModelGraph graph;
  NodeModel node("bat");
  node.add_variable("soc", 0.0);
  node.add_binary("z", 2, 5);
  graph.add_node(std::move(node));
  const FlattenResult flat = graph.flatten();
  REQUIRE(flat.program.binaries.size() == 1);
  CHECK(flat.program.binaries[0].column == 1);
  CHECK(flat.program.binaries[0].priority_major == 2);
  CHECK(flat.program.binaries[0].priority_minor == 5);
}

TEST_CASE("scalarization weights blend tagged objective terms") {
  ModelGraph graph(2);
  NodeModel node("n");
  node.add_variable("x");
  node.add_variable("y");
  node.add_objective(1, LinExpr::of(0, 3.0));
  node.add_objective(2, LinExpr::of(1, 7.0));
  graph.add_node(std::move(node));

  const FlattenResult flat = graph.flatten(std::vector<double>{0.25, 0.75});
  CHECK(flat.program.c[0] == doctest::Approx(0.75));
  CHECK(flat.program.c[1] == doctest::Approx(5.25));

  CHECK_THROWS_AS(graph.flatten(std::vector<double>{1.0}), std::invalid_argument);
}
