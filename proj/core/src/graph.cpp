#include "gridsoc/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace gridsoc {

int NodeModel::add_variable(std::string name, double lower, double upper, VarKind kind) {
  if (!(lower <= upper)) {
    throw std::invalid_argument("node '" + name_ + "': variable '" + name +
                                "' has lower bound above upper bound");
  }
  if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0)) {
    throw std::invalid_argument("node '" + name_ + "': binary variable '" + name +
                                "' must have bounds within [0, 1]");
  }
  Variable v;
  v.name = std::move(name);
  v.lower = lower;
  v.upper = upper;
  v.kind = kind;
  variables_.push_back(std::move(v));
  return static_cast<int>(variables_.size()) - 1;
}

int NodeModel::add_binary(std::string name, int priority_major, int priority_minor) {
  const int idx = add_variable(std::move(name), 0.0, 1.0, VarKind::Binary);
  variables_[idx].priority_major = priority_major;
  variables_[idx].priority_minor = priority_minor;
  return idx;
}

void NodeModel::add_constraint(LinExpr expr, Sense sense) {
  constraints_.push_back({std::move(expr), sense});
}

void NodeModel::add_cone(std::vector<LinExpr> rows, ConeType cone) {
  if (rows.empty()) throw std::invalid_argument("node '" + name_ + "': empty conic block");
  cones_.push_back({std::move(rows), cone});
}

void NodeModel::add_objective(int objective, LinExpr affine, std::vector<QuadTerm> quadratic) {
  ObjectiveTerm term;
  term.objective = objective;
  term.affine = std::move(affine);
  term.quadratic = std::move(quadratic);
  objective_terms_.push_back(std::move(term));
}

int NodeModel::variable_index(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

void check_expr(const LinExpr& expr, int num_vars, const std::string& where) {
  for (const LinTerm& t : expr.terms) {
    if (t.var < 0 || t.var >= num_vars) {
      throw std::invalid_argument(where + ": reference to unknown variable index " +
                                  std::to_string(t.var));
    }
  }
}

}  // namespace

void NodeModel::check(int max_objective) const {
  const int nv = static_cast<int>(variables_.size());
  const std::string where = "node '" + name_ + "'";
  for (const NodeConstraint& c : constraints_) check_expr(c.expr, nv, where);
  for (const ConicBlock& blk : cones_) {
    for (const LinExpr& row : blk.rows) check_expr(row, nv, where);
  }
  for (const ObjectiveTerm& t : objective_terms_) {
    if (t.objective < 1 || t.objective > max_objective) {
      throw std::invalid_argument(where + ": objective index " + std::to_string(t.objective) +
                                  " outside 1.." + std::to_string(max_objective));
    }
    check_expr(t.affine, nv, where);
    for (const QuadTerm& q : t.quadratic) {
      if (q.var_a < 0 || q.var_a >= nv || q.var_b < 0 || q.var_b >= nv) {
        throw std::invalid_argument(where + ": quadratic term references unknown variable");
      }
    }
  }
}

int IndexMap::column(NodeHandle node, int var) const {
  const auto it = column_of.find({node.id, var});
  if (it == column_of.end()) {
    throw std::invalid_argument("index map: no column for node " + std::to_string(node.id) +
                                " variable " + std::to_string(var));
  }
  return it->second;
}

int IndexMap::column(NodeHandle node, std::string_view name) const {
  for (const auto& [key, col] : column_of) {
    if (key.first == node.id && columns[col].name == name) return col;
  }
  throw std::invalid_argument("index map: no column named '" + std::string(name) + "' on node " +
                              std::to_string(node.id));
}

ModelGraph::ModelGraph(int num_objectives) : num_objectives_(num_objectives) {
  if (num_objectives < 1) throw std::invalid_argument("graph: num_objectives must be >= 1");
}

ModelGraph::ModelGraph(const ModelGraph& other)
    : num_objectives_(other.num_objectives_), nodes_(other.nodes_), links_(other.links_) {
  frozen_.store(other.frozen());
}

ModelGraph& ModelGraph::operator=(const ModelGraph& other) {
  num_objectives_ = other.num_objectives_;
  nodes_ = other.nodes_;
  links_ = other.links_;
  frozen_.store(other.frozen());
  return *this;
}

ModelGraph::ModelGraph(ModelGraph&& other) noexcept
    : num_objectives_(other.num_objectives_),
      nodes_(std::move(other.nodes_)),
      links_(std::move(other.links_)) {
  frozen_.store(other.frozen());
}

ModelGraph& ModelGraph::operator=(ModelGraph&& other) noexcept {
  num_objectives_ = other.num_objectives_;
  nodes_ = std::move(other.nodes_);
  links_ = std::move(other.links_);
  frozen_.store(other.frozen());
  return *this;
}

NodeHandle ModelGraph::add_node(NodeModel model) {
  if (frozen()) throw std::logic_error("graph: add_node after flatten");
  model.check(num_objectives_);
  nodes_.push_back(std::move(model));
  return {static_cast<int>(nodes_.size()) - 1};
}

EdgeHandle ModelGraph::add_link(LinkConstraint link) {
  if (frozen()) throw std::logic_error("graph: add_link after flatten");
  std::set<int> touched;
  for (const LinkTerm& t : link.terms) {
    if (t.node.id < 0 || t.node.id >= num_nodes()) {
      throw std::invalid_argument("link: unknown node " + std::to_string(t.node.id));
    }
    const NodeModel& node = nodes_[t.node.id];
    if (t.var < 0 || t.var >= static_cast<int>(node.variables().size())) {
      throw std::invalid_argument("link: node " + std::to_string(t.node.id) +
                                  " has no variable index " + std::to_string(t.var));
    }
    touched.insert(t.node.id);
  }
  if (touched.size() < 2) {
    throw std::invalid_argument(
        "link: references fewer than two nodes; add it as a node constraint instead");
  }
  links_.push_back(std::move(link));
  return {static_cast<int>(links_.size()) - 1};
}

int ModelGraph::num_variables() const {
  int n = 0;
  for (const NodeModel& node : nodes_) n += static_cast<int>(node.variables().size());
  return n;
}

const NodeModel& ModelGraph::node(NodeHandle handle) const {
  if (handle.id < 0 || handle.id >= num_nodes()) throw std::invalid_argument("bad node handle");
  return nodes_[handle.id];
}

const LinkConstraint& ModelGraph::link(EdgeHandle handle) const {
  if (handle.id < 0 || handle.id >= num_links()) throw std::invalid_argument("bad edge handle");
  return links_[handle.id];
}

FlattenResult ModelGraph::flatten(std::span<const double> weights) const {
  if (nodes_.empty()) throw std::invalid_argument("flatten: empty graph");
  std::vector<double> w(weights.begin(), weights.end());
  if (w.empty()) w.assign(num_objectives_, 1.0);
  if (static_cast<int>(w.size()) != num_objectives_) {
    throw std::invalid_argument("flatten: expected " + std::to_string(num_objectives_) +
                                " weights, got " + std::to_string(w.size()));
  }
  frozen_.store(true, std::memory_order_relaxed);

  FlattenResult out;
  IndexMap& index = out.index;

  // Columns: nodes in insertion order, variables in declaration order.
  for (int nid = 0; nid < num_nodes(); ++nid) {
    const auto& vars = nodes_[nid].variables();
    for (int vi = 0; vi < static_cast<int>(vars.size()); ++vi) {
      IndexMap::ColumnInfo info;
      info.node = nid;
      info.var = vi;
      info.name = vars[vi].name;
      const int col = static_cast<int>(index.columns.size());
      index.columns.push_back(std::move(info));
      index.column_of[{nid, vi}] = col;
    }
  }
  const int n = static_cast<int>(index.columns.size());

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> b;
  std::vector<Cone> cones;
  std::vector<IndexMap::RowInfo> rows;

  auto emit_expr = [&](const LinExpr& expr, int nid, double sign) {
    // Row convention: s = b - A x, so "expr (+sense)" becomes
    // A_row = -sign * coeffs, b_row = sign * constant.
    const int row = static_cast<int>(b.size());
    for (const LinTerm& t : expr.terms) {
      const int col = index.column_of.at({nid, t.var});
      if (t.coeff != 0.0) trips.emplace_back(row, col, -sign * t.coeff);
    }
    b.push_back(sign * expr.constant);
    return row;
  };

  // Node constraints and conic blocks.
  for (int nid = 0; nid < num_nodes(); ++nid) {
    const NodeModel& node = nodes_[nid];
    for (const NodeConstraint& c : node.constraints()) {
      emit_expr(c.expr, nid, 1.0);
      cones.push_back({c.sense == Sense::Eq ? ConeType::Zero : ConeType::NonNegative, 1});
      rows.push_back({IndexMap::RowSource::Node, nid});
    }
    for (const ConicBlock& blk : node.cones()) {
      for (const LinExpr& row_expr : blk.rows) {
        emit_expr(row_expr, nid, 1.0);
        rows.push_back({IndexMap::RowSource::Node, nid});
      }
      cones.push_back({blk.cone, static_cast<int>(blk.rows.size())});
    }
  }

  // Linking constraints.
  for (int lid = 0; lid < num_links(); ++lid) {
    const LinkConstraint& link = links_[lid];
    const int row = static_cast<int>(b.size());
    for (const LinkTerm& t : link.terms) {
      const int col = index.column_of.at({t.node.id, t.var});
      if (t.coeff != 0.0) trips.emplace_back(row, col, -t.coeff);
    }
    b.push_back(link.constant);
    cones.push_back({link.sense == Sense::Eq ? ConeType::Zero : ConeType::NonNegative, 1});
    rows.push_back({IndexMap::RowSource::Link, lid});
  }

  // Variable bounds, in column order.
  for (int col = 0; col < n; ++col) {
    const IndexMap::ColumnInfo& info = index.columns[col];
    const Variable& var = nodes_[info.node].variables()[info.var];
    if (var.lower > -kInf) {
      const int row = static_cast<int>(b.size());
      trips.emplace_back(row, col, -1.0);  // s = x - lb >= 0
      b.push_back(-var.lower);
      cones.push_back({ConeType::NonNegative, 1});
      rows.push_back({IndexMap::RowSource::Bound, col});
      index.columns[col].lower_bound_row = row;
    }
    if (var.upper < kInf) {
      const int row = static_cast<int>(b.size());
      trips.emplace_back(row, col, 1.0);  // s = ub - x >= 0
      b.push_back(var.upper);
      cones.push_back({ConeType::NonNegative, 1});
      rows.push_back({IndexMap::RowSource::Bound, col});
      index.columns[col].upper_bound_row = row;
    }
  }

  const int m = static_cast<int>(b.size());
  ConicProgram& prog = out.program;
  prog.A.resize(m, n);
  prog.A.setFromTriplets(trips.begin(), trips.end());
  prog.b = Eigen::Map<Eigen::VectorXd>(b.data(), m);
  prog.cones = std::move(cones);
  index.rows = std::move(rows);

  // Scalarized objective: affine parts into c, quadratic parts into Q.
  prog.c = Eigen::VectorXd::Zero(n);
  prog.objective_constant = 0.0;
  std::vector<Eigen::Triplet<double>> quad;
  for (int nid = 0; nid < num_nodes(); ++nid) {
    for (const ObjectiveTerm& term : nodes_[nid].objective_terms()) {
      const double wk = w[term.objective - 1];
      if (wk == 0.0) continue;
      for (const LinTerm& t : term.affine.terms) {
        prog.c[index.column_of.at({nid, t.var})] += wk * t.coeff;
      }
      prog.objective_constant += wk * term.affine.constant;
      for (const QuadTerm& q : term.quadratic) {
        const int ca = index.column_of.at({nid, q.var_a});
        const int cb = index.column_of.at({nid, q.var_b});
        if (ca == cb) {
          quad.emplace_back(ca, ca, wk * q.coeff);
        } else {
          quad.emplace_back(ca, cb, 0.5 * wk * q.coeff);
          quad.emplace_back(cb, ca, 0.5 * wk * q.coeff);
        }
      }
    }
  }
  if (!quad.empty()) {
    prog.quadratic.resize(n, n);
    prog.quadratic.setFromTriplets(quad.begin(), quad.end());
  }

  // Binary columns pass through unchanged; integrality is a separate layer.
  for (int col = 0; col < n; ++col) {
    const IndexMap::ColumnInfo& info = index.columns[col];
    const Variable& var = nodes_[info.node].variables()[info.var];
    if (var.kind == VarKind::Binary) {
      prog.binaries.push_back({col, var.priority_major, var.priority_minor});
    }
  }

  prog.validate();
  return out;
}

double evaluate(const LinExpr& expr, std::span<const double> values) {
  double acc = expr.constant;
  for (const LinTerm& t : expr.terms) {
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= values.size()) {
      throw std::invalid_argument("evaluate: variable index out of range");
    }
    acc += t.coeff * values[t.var];
  }
  return acc;
}

}  // namespace gridsoc
