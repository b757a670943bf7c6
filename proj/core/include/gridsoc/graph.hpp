#pragma once

#include <atomic>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsoc/program.hpp"

namespace gridsoc {

enum class VarKind { Continuous, Binary };

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node-local decision variable declaration.
struct Variable {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  VarKind kind = VarKind::Continuous;
  int priority_major = 0;  // branching tie-break metadata for binaries
  int priority_minor = 0;
};

struct LinTerm {
  int var = -1;  // local index within the owning node
  double coeff = 0.0;
};

struct LinExpr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  LinExpr& add(int var, double coeff) {
    terms.push_back({var, coeff});
    return *this;
  }
  static LinExpr of(int var, double coeff = 1.0, double constant = 0.0) {
    LinExpr e;
    e.add(var, coeff);
    e.constant = constant;
    return e;
  }
  static LinExpr constant_of(double value) {
    LinExpr e;
    e.constant = value;
    return e;
  }
};

struct QuadTerm {
  int var_a = -1;
  int var_b = -1;
  double coeff = 0.0;
};

enum class Sense { Eq, Geq };  // expr == 0 or expr >= 0

struct NodeConstraint {
  LinExpr expr;
  Sense sense = Sense::Eq;
};

struct ConicBlock {
  std::vector<LinExpr> rows;
  ConeType cone = ConeType::SecondOrder;
};

struct ObjectiveTerm {
  int objective = 1;  // 1-based objective index
  LinExpr affine;
  std::vector<QuadTerm> quadratic;
};

// A self-contained sub-system model: variables, constraints over its own
// variables only, and objective terms tagged with an objective index.
class NodeModel {
 public:
  explicit NodeModel(std::string name = {}) : name_(std::move(name)) {}

  int add_variable(std::string name, double lower = -kInf, double upper = kInf,
                   VarKind kind = VarKind::Continuous);
  int add_binary(std::string name, int priority_major = 0, int priority_minor = 0);
  void add_constraint(LinExpr expr, Sense sense);
  void add_cone(std::vector<LinExpr> rows, ConeType cone);
  void add_objective(int objective, LinExpr affine, std::vector<QuadTerm> quadratic = {});

  const std::string& name() const { return name_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<NodeConstraint>& constraints() const { return constraints_; }
  const std::vector<ConicBlock>& cones() const { return cones_; }
  const std::vector<ObjectiveTerm>& objective_terms() const { return objective_terms_; }

  int variable_index(std::string_view name) const;  // -1 when absent

  // Throws when a constraint or objective references an unknown variable or
  // when max_objective is exceeded.
  void check(int max_objective) const;

 private:
  std::string name_;
  std::vector<Variable> variables_;
  std::vector<NodeConstraint> constraints_;
  std::vector<ConicBlock> cones_;
  std::vector<ObjectiveTerm> objective_terms_;
};

struct NodeHandle {
  int id = -1;
  bool operator==(const NodeHandle&) const = default;
};
struct EdgeHandle {
  int id = -1;
};

struct LinkTerm {
  NodeHandle node;
  int var = -1;  // local index within node
  double coeff = 0.0;
};

// Affine coupling constraint across >= 2 distinct nodes.
struct LinkConstraint {
  std::vector<LinkTerm> terms;
  double constant = 0.0;
  Sense sense = Sense::Eq;
};

class IndexMap {
 public:
  struct ColumnInfo {
    int node = -1;
    int var = -1;
    std::string name;
    int lower_bound_row = -1;  // -1 when the bound is infinite
    int upper_bound_row = -1;
  };
  enum class RowSource { Node, Link, Bound };
  struct RowInfo {
    RowSource source = RowSource::Node;
    int id = -1;  // node id, link id, or column index for bounds
  };

  std::vector<ColumnInfo> columns;
  std::vector<RowInfo> rows;

  int column(NodeHandle node, int var) const;
  int column(NodeHandle node, std::string_view name) const;

  // Populated by flatten.
  std::map<std::pair<int, int>, int> column_of;
};

struct FlattenResult {
  ConicProgram program;
  IndexMap index;
};

// Graph of node models plus affine linking constraints. Construction is
// single-writer; after the first flatten the graph is frozen and both the
// graph and its flattened programs are safe to share across threads.
class ModelGraph {
 public:
  explicit ModelGraph(int num_objectives = 1);
  ModelGraph(const ModelGraph& other);
  ModelGraph& operator=(const ModelGraph& other);
  ModelGraph(ModelGraph&& other) noexcept;
  ModelGraph& operator=(ModelGraph&& other) noexcept;

  NodeHandle add_node(NodeModel model);
  EdgeHandle add_link(LinkConstraint link);

  // Scalarizes tagged objective terms with `weights` (length num_objectives;
  // empty means all ones) and lowers everything to standard conic form.
  // Quadratic objective terms are collected into program.quadratic for a later
  // reformulate_quadratic pass. Deterministic: nodes in insertion order,
  // variables in declaration order, then links, then bound rows.
  FlattenResult flatten(std::span<const double> weights = {}) const;

  int num_objectives() const { return num_objectives_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_variables() const;
  bool frozen() const { return frozen_.load(std::memory_order_relaxed); }

  const NodeModel& node(NodeHandle handle) const;
  const LinkConstraint& link(EdgeHandle handle) const;

 private:
  int num_objectives_ = 1;
  std::vector<NodeModel> nodes_;
  std::vector<LinkConstraint> links_;
  mutable std::atomic<bool> frozen_{false};
};

// Evaluates an expression against node-local variable values (test support and
// flatten verification).
double evaluate(const LinExpr& expr, std::span<const double> values);

}  // namespace gridsoc
