#include "gridsoc/codesign.hpp"

#include <cmath>
#include <queue>
#include <stdexcept>

namespace gridsoc {

namespace {

constexpr double kSqrt2Inv = 0.7071067811865475244;

void check_weights(std::array<double, 2> w) {
  if (w[0] < -1e-12 || w[1] < -1e-12 || std::abs(w[0] + w[1] - 1.0) > 1e-9) {
    throw std::invalid_argument("build_graph: weights must lie on the 2-simplex");
  }
}

CodesignLayout make_layout(const CaseData& data) {
  CodesignLayout layout;
  layout.horizon = data.horizon;
  layout.n_ac_bus = static_cast<int>(data.ac_buses.size());
  layout.n_ac_branch = static_cast<int>(data.ac_branches.size());
  layout.n_dc_bus = static_cast<int>(data.dc_buses.size());
  layout.n_dc_branch = static_cast<int>(data.dc_branches.size());
  layout.n_converter = static_cast<int>(data.converters.size());
  layout.n_battery = static_cast<int>(data.batteries.size());

  layout.ac_bus_vars.resize(layout.n_ac_bus);
  for (int i = 0; i < layout.n_ac_bus; ++i) {
    auto& vars = layout.ac_bus_vars[i];
    int next = 0;
    vars.cii = next++;
    for (int e = 0; e < layout.n_ac_branch; ++e) {
      const AcBranch& br = data.ac_branches[e];
      if (data.ac_bus_index(br.from) == i || data.ac_bus_index(br.to) == i) {
        vars.branch_ids.push_back(e);
        vars.c_dir.push_back(next++);
        vars.s_dir.push_back(next++);
      }
    }
    for (int g = 0; g < static_cast<int>(data.generators.size()); ++g) {
      if (data.ac_bus_index(data.generators[g].bus) == i) {
        vars.gen_ids.push_back(g);
        vars.pg.push_back(next++);
        vars.qg.push_back(next++);
      }
    }
    for (int c = 0; c < layout.n_converter; ++c) {
      if (data.ac_bus_index(data.converters[c].ac_bus) == i) {
        vars.conv_ids.push_back(c);
        vars.pconv.push_back(next++);
      }
    }
    for (int s = 0; s < layout.n_battery; ++s) {
      if (data.ac_bus_index(data.batteries[s].ac_bus) == i) {
        vars.battery_ids.push_back(s);
        vars.pch.push_back(next++);
        vars.pdis.push_back(next++);
      }
    }
  }

  layout.dc_bus_vars.resize(layout.n_dc_bus);
  for (int i = 0; i < layout.n_dc_bus; ++i) {
    auto& vars = layout.dc_bus_vars[i];
    int next = 0;
    vars.vii = next++;
    for (int e = 0; e < layout.n_dc_branch; ++e) {
      const DcBranch& br = data.dc_branches[e];
      if (data.dc_bus_index(br.from) == i || data.dc_bus_index(br.to) == i) {
        vars.branch_ids.push_back(e);
        vars.v_dir.push_back(next++);
      }
    }
    for (int c = 0; c < layout.n_converter; ++c) {
      if (data.dc_bus_index(data.converters[c].dc_bus) == i) {
        vars.conv_ids.push_back(c);
        vars.pdc.push_back(next++);
      }
    }
  }
  return layout;
}

}  // namespace

CodesignGraph build_graph(const CaseData& data, std::array<double, 2> weights,
                          const SizingSpec& sizing) {
  data.validate();
  check_weights(weights);
  if (sizing.mode == SizingSpec::Mode::Fixed) {
    if (sizing.sizes.size() != data.batteries.size()) {
      throw std::invalid_argument("build_graph: fixed sizing needs one size per battery");
    }
    for (std::size_t s = 0; s < sizing.sizes.size(); ++s) {
      const Battery& bat = data.batteries[s];
      if (sizing.sizes[s] < bat.bs_min - 1e-9 || sizing.sizes[s] > bat.bs_max + 1e-9) {
        throw std::invalid_argument("build_graph: fixed size for battery " + std::to_string(s) +
                                    " outside [bs_min, bs_max]");
      }
    }
  }

  CodesignGraph model;
  model.layout = make_layout(data);
  model.sizing = sizing;
  model.weights = weights;
  const CodesignLayout& layout = model.layout;
  const int T = data.horizon;
  const double base = data.mva_base;

  ModelGraph graph(2);

  for (int t = 0; t < T; ++t) {
    const double load_f = data.schedule.load[t];
    const double wind_f = data.schedule.wind[t];
    const double fuel_f = data.schedule.fuel_cost[t];
    const std::string suffix = "@t" + std::to_string(t + 1);

    // AC bus nodes: lifted diagonal + directed row entries, generator output,
    // active/reactive balance.
    for (int i = 0; i < layout.n_ac_bus; ++i) {
      const AcBus& bus = data.ac_buses[i];
      const auto& vars = layout.ac_bus_vars[i];
      NodeModel node("acbus" + std::to_string(bus.id) + suffix);

      const int cii = node.add_variable("cii", bus.vmin * bus.vmin, bus.vmax * bus.vmax);
      double g_diag = 0.0, b_diag = 0.0;
      std::vector<int> c_dir(vars.branch_ids.size()), s_dir(vars.branch_ids.size());
      for (std::size_t k = 0; k < vars.branch_ids.size(); ++k) {
        const AcBranch& br = data.ac_branches[vars.branch_ids[k]];
        const std::string tag =
            std::to_string(br.from) + "-" + std::to_string(br.to);
        c_dir[k] = node.add_variable("c:" + tag);
        s_dir[k] = node.add_variable("s:" + tag);
        g_diag += br.g();
        b_diag += br.b() + 0.5 * br.charging;
      }

      LinExpr p_balance, q_balance;
      p_balance.constant = -bus.pd * load_f;
      q_balance.constant = -bus.qd * load_f;
      p_balance.add(cii, -g_diag);
      q_balance.add(cii, b_diag);
      for (std::size_t k = 0; k < vars.branch_ids.size(); ++k) {
        const AcBranch& br = data.ac_branches[vars.branch_ids[k]];
        p_balance.add(c_dir[k], br.g());
        p_balance.add(s_dir[k], -br.b());
        q_balance.add(s_dir[k], -br.g());
        q_balance.add(c_dir[k], -br.b());
      }

      for (std::size_t k = 0; k < vars.gen_ids.size(); ++k) {
        const Generator& gen = data.generators[vars.gen_ids[k]];
        const int pg = node.add_variable("pg", gen.pmin, gen.pmax);
        const int qg = node.add_variable("qg", gen.qmin, gen.qmax);
        p_balance.add(pg, 1.0);
        q_balance.add(qg, 1.0);
        LinExpr fuel;
        fuel.add(pg, fuel_f * gen.cost_b);
        fuel.constant = fuel_f * gen.cost_c;
        std::vector<QuadTerm> quad;
        if (gen.cost_a != 0.0) quad.push_back({pg, pg, fuel_f * gen.cost_a});
        node.add_objective(1, std::move(fuel), std::move(quad));
      }
      for (std::size_t k = 0; k < vars.conv_ids.size(); ++k) {
        const int pconv = node.add_variable("pconv");
        p_balance.add(pconv, 1.0);
      }
      for (std::size_t k = 0; k < vars.battery_ids.size(); ++k) {
        const int pch = node.add_variable("pch", 0.0);
        const int pdis = node.add_variable("pdis", 0.0);
        p_balance.add(pch, -1.0);
        p_balance.add(pdis, 1.0);
      }

      node.add_constraint(std::move(p_balance), Sense::Eq);
      node.add_constraint(std::move(q_balance), Sense::Eq);
      graph.add_node(std::move(node));
    }

    // AC branch nodes: canonical lifted pair, mirrored endpoint diagonals, the
    // voltage-product cone and the series-loss definition.
    for (int e = 0; e < layout.n_ac_branch; ++e) {
      const AcBranch& br = data.ac_branches[e];
      NodeModel node("acbr" + std::to_string(br.from) + "-" + std::to_string(br.to) + suffix);
      const int c = node.add_variable("c");
      const int s = node.add_variable("s");
      const int cii = node.add_variable("cii");
      const int cjj = node.add_variable("cjj");
      const int loss = node.add_variable("loss");
      node.add_cone({LinExpr::of(cii, kSqrt2Inv), LinExpr::of(cjj, kSqrt2Inv), LinExpr::of(c),
                     LinExpr::of(s)},
                    ConeType::RotatedSecondOrder);
      LinExpr def = LinExpr::of(loss);
      const double gb = br.g() * base;
      def.add(cii, -gb).add(cjj, -gb).add(c, 2.0 * gb);
      node.add_constraint(std::move(def), Sense::Eq);
      node.add_objective(2, LinExpr::of(loss));
      graph.add_node(std::move(node));
    }

    // DC bus nodes: squared voltage, directed products, power balance with
    // wind injection and converter draw.
    for (int i = 0; i < layout.n_dc_bus; ++i) {
      const DcBus& bus = data.dc_buses[i];
      const auto& vars = layout.dc_bus_vars[i];
      NodeModel node("dcbus" + std::to_string(bus.id) + suffix);
      const int vii = node.add_variable("vii", bus.vmin * bus.vmin, bus.vmax * bus.vmax);

      double wind_pu = 0.0;
      for (const WindFarm& wf : data.wind_farms) {
        if (data.dc_bus_index(wf.dc_bus) == i) wind_pu += wf.nominal_mw / base;
      }

      LinExpr balance;
      balance.constant = wind_pu * wind_f;
      double g_diag = 0.0;
      for (std::size_t k = 0; k < vars.branch_ids.size(); ++k) {
        const DcBranch& br = data.dc_branches[vars.branch_ids[k]];
        const std::string tag = std::to_string(br.from) + "-" + std::to_string(br.to);
        const int v = node.add_variable("v:" + tag);
        balance.add(v, br.g());
        g_diag += br.g();
      }
      balance.add(vii, -g_diag);
      for (std::size_t k = 0; k < vars.conv_ids.size(); ++k) {
        const int pdc = node.add_variable("pdc");
        balance.add(pdc, -1.0);
      }
      node.add_constraint(std::move(balance), Sense::Eq);
      graph.add_node(std::move(node));
    }

    // DC branch nodes.
    for (int e = 0; e < layout.n_dc_branch; ++e) {
      const DcBranch& br = data.dc_branches[e];
      NodeModel node("dcbr" + std::to_string(br.from) + "-" + std::to_string(br.to) + suffix);
      const int v = node.add_variable("v");
      const int vii = node.add_variable("vii");
      const int vjj = node.add_variable("vjj");
      const int loss = node.add_variable("loss");
      node.add_cone({LinExpr::of(vii, kSqrt2Inv), LinExpr::of(vjj, kSqrt2Inv), LinExpr::of(v)},
                    ConeType::RotatedSecondOrder);
      LinExpr def = LinExpr::of(loss);
      const double gb = br.g() * base;
      def.add(vii, -gb).add(vjj, -gb).add(v, 2.0 * gb);
      node.add_constraint(std::move(def), Sense::Eq);
      node.add_objective(2, LinExpr::of(loss));
      graph.add_node(std::move(node));
    }

    // Converter nodes: AC/DC balance, loss epigraph pair, droop cone.
    for (int c = 0; c < layout.n_converter; ++c) {
      const Converter& conv = data.converters[c];
      NodeModel node("conv" + std::to_string(c) + suffix);
      const int pconv = node.add_variable("pconv");
      const int ploss = node.add_variable("ploss", 0.0);
      const int pdc = node.add_variable("pdc");
      const int vdd = node.add_variable("vdd");

      LinExpr balance = LinExpr::of(pconv);
      balance.add(ploss, 1.0).add(pdc, -1.0);
      node.add_constraint(std::move(balance), Sense::Eq);

      LinExpr above = LinExpr::of(ploss);
      above.add(pdc, -conv.beta);
      node.add_constraint(std::move(above), Sense::Geq);
      LinExpr below = LinExpr::of(ploss);
      below.add(pdc, conv.beta);
      node.add_constraint(std::move(below), Sense::Geq);

      node.add_cone({LinExpr::of(vdd, 0.5), LinExpr::constant_of(1.0),
                     LinExpr::of(pconv, conv.k, conv.d)},
                    ConeType::RotatedSecondOrder);
      node.add_objective(2, LinExpr::of(ploss, base));
      graph.add_node(std::move(node));
    }

    // Battery nodes: size, state of charge, charge/discharge with indicator.
    for (int s = 0; s < layout.n_battery; ++s) {
      const Battery& bat = data.batteries[s];
      NodeModel node("bat" + std::to_string(s) + suffix);
      double bs_lo = bat.bs_min, bs_hi = bat.bs_max;
      if (sizing.mode == SizingSpec::Mode::Fixed) bs_lo = bs_hi = sizing.sizes[s];
      const int bs = node.add_variable("bs", bs_lo, bs_hi);
      const double soc_lo = (t == T - 1) ? std::max(0.0, bat.soc_terminal_min) : 0.0;
      const int soc = node.add_variable("soc", soc_lo);
      const int pch = node.add_variable("pch", 0.0);
      const int pdis = node.add_variable("pdis", 0.0);
      const int z = node.add_binary("z", s, t);

      LinExpr charge_cap = LinExpr::of(z, bat.p_charge_max);
      charge_cap.add(pch, -1.0);
      node.add_constraint(std::move(charge_cap), Sense::Geq);
      LinExpr discharge_cap = LinExpr::of(z, -bat.p_discharge_max, bat.p_discharge_max);
      discharge_cap.add(pdis, -1.0);
      node.add_constraint(std::move(discharge_cap), Sense::Geq);
      LinExpr headroom = LinExpr::of(bs);
      headroom.add(soc, -1.0);
      node.add_constraint(std::move(headroom), Sense::Geq);
      if (t == 0) {
        LinExpr dynamics = LinExpr::of(soc, 1.0, -bat.soc_initial);
        dynamics.add(pch, -bat.eta_charge).add(pdis, bat.eta_discharge);
        node.add_constraint(std::move(dynamics), Sense::Eq);
      }

      LinExpr opex;
      opex.add(bs, bat.install_rate / static_cast<double>(T));
      opex.add(pch, bat.operation_rate).add(pdis, bat.operation_rate);
      node.add_objective(1, std::move(opex));
      graph.add_node(std::move(node));
    }
  }

  const auto& lay = layout;

  // Symmetry and mirror ties: bus-side directed entries equal the branch's
  // canonical pair; endpoint diagonals mirrored onto the branch node.
  for (int t = 0; t < T; ++t) {
    for (int e = 0; e < lay.n_ac_branch; ++e) {
      const AcBranch& br = data.ac_branches[e];
      const int from = data.ac_bus_index(br.from);
      const int to = data.ac_bus_index(br.to);
      const NodeHandle at_branch = lay.ac_branch(t, e);
      const auto dir_slot = [&](int bus, int branch) {
        const auto& ids = lay.ac_bus_vars[bus].branch_ids;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (ids[k] == branch) return static_cast<int>(k);
        }
        throw std::logic_error("layout: branch not incident to bus");
      };
      const int kf = dir_slot(from, e);
      const int kt = dir_slot(to, e);
      const auto tie = [&](NodeHandle a, int va, NodeHandle b, int vb, double sign) {
        LinkConstraint link;
        link.terms = {{a, va, 1.0}, {b, vb, sign}};
        graph.add_link(std::move(link));
      };
      tie(lay.ac_bus(t, from), lay.ac_bus_vars[from].c_dir[kf], at_branch, lay.ac_branch_vars.c,
          -1.0);
      tie(lay.ac_bus(t, from), lay.ac_bus_vars[from].s_dir[kf], at_branch, lay.ac_branch_vars.s,
          -1.0);
      tie(lay.ac_bus(t, to), lay.ac_bus_vars[to].c_dir[kt], at_branch, lay.ac_branch_vars.c,
          -1.0);
      tie(lay.ac_bus(t, to), lay.ac_bus_vars[to].s_dir[kt], at_branch, lay.ac_branch_vars.s,
          1.0);  // s_ji = -s_ij
      tie(at_branch, lay.ac_branch_vars.cii, lay.ac_bus(t, from), lay.ac_bus_vars[from].cii,
          -1.0);
      tie(at_branch, lay.ac_branch_vars.cjj, lay.ac_bus(t, to), lay.ac_bus_vars[to].cii, -1.0);
    }
    for (int e = 0; e < lay.n_dc_branch; ++e) {
      const DcBranch& br = data.dc_branches[e];
      const int from = data.dc_bus_index(br.from);
      const int to = data.dc_bus_index(br.to);
      const NodeHandle at_branch = lay.dc_branch(t, e);
      const auto dir_slot = [&](int bus, int branch) {
        const auto& ids = lay.dc_bus_vars[bus].branch_ids;
        for (std::size_t k = 0; k < ids.size(); ++k) {
          if (ids[k] == branch) return static_cast<int>(k);
        }
        throw std::logic_error("layout: branch not incident to bus");
      };
      const auto tie = [&](NodeHandle a, int va, NodeHandle b, int vb) {
        LinkConstraint link;
        link.terms = {{a, va, 1.0}, {b, vb, -1.0}};
        graph.add_link(std::move(link));
      };
      tie(lay.dc_bus(t, from), lay.dc_bus_vars[from].v_dir[dir_slot(from, e)], at_branch,
          lay.dc_branch_vars.v);
      tie(lay.dc_bus(t, to), lay.dc_bus_vars[to].v_dir[dir_slot(to, e)], at_branch,
          lay.dc_branch_vars.v);
      tie(at_branch, lay.dc_branch_vars.vii, lay.dc_bus(t, from), lay.dc_bus_vars[from].vii);
      tie(at_branch, lay.dc_branch_vars.vjj, lay.dc_bus(t, to), lay.dc_bus_vars[to].vii);
    }
    for (int c = 0; c < lay.n_converter; ++c) {
      const Converter& conv = data.converters[c];
      const int ab = data.ac_bus_index(conv.ac_bus);
      const int db = data.dc_bus_index(conv.dc_bus);
      const auto& bus_vars = lay.ac_bus_vars[ab];
      const auto& dc_vars = lay.dc_bus_vars[db];
      int slot_ac = -1, slot_dc = -1;
      for (std::size_t k = 0; k < bus_vars.conv_ids.size(); ++k) {
        if (bus_vars.conv_ids[k] == c) slot_ac = static_cast<int>(k);
      }
      for (std::size_t k = 0; k < dc_vars.conv_ids.size(); ++k) {
        if (dc_vars.conv_ids[k] == c) slot_dc = static_cast<int>(k);
      }
      LinkConstraint ac_tie;
      ac_tie.terms = {{lay.ac_bus(t, ab), bus_vars.pconv[slot_ac], 1.0},
                      {lay.converter(t, c), lay.converter_vars.pconv, -1.0}};
      graph.add_link(std::move(ac_tie));
      LinkConstraint dc_tie;
      dc_tie.terms = {{lay.dc_bus(t, db), dc_vars.pdc[slot_dc], 1.0},
                      {lay.converter(t, c), lay.converter_vars.pdc, -1.0}};
      graph.add_link(std::move(dc_tie));
      LinkConstraint v_tie;
      v_tie.terms = {{lay.converter(t, c), lay.converter_vars.vdd, 1.0},
                     {lay.dc_bus(t, db), dc_vars.vii, -1.0}};
      graph.add_link(std::move(v_tie));
    }
    for (int s = 0; s < lay.n_battery; ++s) {
      const Battery& bat = data.batteries[s];
      const int ab = data.ac_bus_index(bat.ac_bus);
      const auto& bus_vars = lay.ac_bus_vars[ab];
      int slot = -1;
      for (std::size_t k = 0; k < bus_vars.battery_ids.size(); ++k) {
        if (bus_vars.battery_ids[k] == s) slot = static_cast<int>(k);
      }
      LinkConstraint ch_tie;
      ch_tie.terms = {{lay.ac_bus(t, ab), bus_vars.pch[slot], 1.0},
                      {lay.battery(t, s), lay.battery_vars.pch, -1.0 / base}};
      graph.add_link(std::move(ch_tie));
      LinkConstraint dis_tie;
      dis_tie.terms = {{lay.ac_bus(t, ab), bus_vars.pdis[slot], 1.0},
                       {lay.battery(t, s), lay.battery_vars.pdis, -1.0 / base}};
      graph.add_link(std::move(dis_tie));
    }
  }

  // Inter-hour edges: generator ramps, state-of-charge dynamics, and (in
  // codesign mode) size consistency.
  for (int t = 0; t + 1 < T; ++t) {
    for (int i = 0; i < lay.n_ac_bus; ++i) {
      const auto& vars = lay.ac_bus_vars[i];
      for (std::size_t k = 0; k < vars.gen_ids.size(); ++k) {
        const Generator& gen = data.generators[vars.gen_ids[k]];
        const auto ramp = [&](int var, double limit) {
          LinkConstraint up;  // limit - (x_{t+1} - x_t) >= 0
          up.terms = {{lay.ac_bus(t + 1, i), var, -1.0}, {lay.ac_bus(t, i), var, 1.0}};
          up.constant = limit;
          up.sense = Sense::Geq;
          graph.add_link(std::move(up));
          LinkConstraint down;  // (x_{t+1} - x_t) + limit >= 0
          down.terms = {{lay.ac_bus(t + 1, i), var, 1.0}, {lay.ac_bus(t, i), var, -1.0}};
          down.constant = limit;
          down.sense = Sense::Geq;
          graph.add_link(std::move(down));
        };
        ramp(vars.pg[k], gen.ramp_p);
        ramp(vars.qg[k], gen.ramp_q);
      }
    }
    for (int s = 0; s < lay.n_battery; ++s) {
      const Battery& bat = data.batteries[s];
      LinkConstraint dyn;  // soc_{t+1} - soc_t - eta_ch pch_{t+1} + eta_dis pdis_{t+1} = 0
      dyn.terms = {{lay.battery(t + 1, s), lay.battery_vars.soc, 1.0},
                   {lay.battery(t, s), lay.battery_vars.soc, -1.0},
                   {lay.battery(t + 1, s), lay.battery_vars.pch, -bat.eta_charge},
                   {lay.battery(t + 1, s), lay.battery_vars.pdis, bat.eta_discharge}};
      graph.add_link(std::move(dyn));
      if (sizing.mode == SizingSpec::Mode::Codesign) {
        LinkConstraint size_tie;
        size_tie.terms = {{lay.battery(t, s), lay.battery_vars.bs, 1.0},
                          {lay.battery(t + 1, s), lay.battery_vars.bs, -1.0}};
        graph.add_link(std::move(size_tie));
      }
    }
  }

  model.graph = std::move(graph);
  return model;
}

OperatingSolution extract_solution(const CaseData& data, const CodesignGraph& model,
                                   const IndexMap& index, const Eigen::VectorXd& x) {
  const CodesignLayout& lay = model.layout;
  const int T = lay.horizon;
  OperatingSolution sol;
  sol.horizon = T;

  const auto value = [&](NodeHandle node, int var) { return x[index.column(node, var)]; };

  const auto table = [&](int count) {
    return std::vector<std::vector<double>>(T, std::vector<double>(count, 0.0));
  };
  sol.c_diag = table(lay.n_ac_bus);
  sol.c_off = table(lay.n_ac_branch);
  sol.s_off = table(lay.n_ac_branch);
  sol.v_diag = table(lay.n_dc_bus);
  sol.v_off = table(lay.n_dc_branch);
  sol.gen_p = table(static_cast<int>(data.generators.size()));
  sol.gen_q = table(static_cast<int>(data.generators.size()));
  sol.conv_p_ac = table(lay.n_converter);
  sol.conv_loss = table(lay.n_converter);
  sol.conv_p_dc = table(lay.n_converter);
  sol.charge_mw = table(lay.n_battery);
  sol.discharge_mw = table(lay.n_battery);
  sol.soc_mwh = table(lay.n_battery);
  sol.indicator = table(lay.n_battery);
  sol.sizes_mwh.assign(lay.n_battery, 0.0);

  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < lay.n_ac_bus; ++i) {
      sol.c_diag[t][i] = value(lay.ac_bus(t, i), lay.ac_bus_vars[i].cii);
      const auto& vars = lay.ac_bus_vars[i];
      for (std::size_t k = 0; k < vars.gen_ids.size(); ++k) {
        sol.gen_p[t][vars.gen_ids[k]] = value(lay.ac_bus(t, i), vars.pg[k]);
        sol.gen_q[t][vars.gen_ids[k]] = value(lay.ac_bus(t, i), vars.qg[k]);
      }
    }
    for (int e = 0; e < lay.n_ac_branch; ++e) {
      sol.c_off[t][e] = value(lay.ac_branch(t, e), lay.ac_branch_vars.c);
      sol.s_off[t][e] = value(lay.ac_branch(t, e), lay.ac_branch_vars.s);
    }
    for (int i = 0; i < lay.n_dc_bus; ++i) {
      sol.v_diag[t][i] = value(lay.dc_bus(t, i), lay.dc_bus_vars[i].vii);
    }
    for (int e = 0; e < lay.n_dc_branch; ++e) {
      sol.v_off[t][e] = value(lay.dc_branch(t, e), lay.dc_branch_vars.v);
    }
    for (int c = 0; c < lay.n_converter; ++c) {
      sol.conv_p_ac[t][c] = value(lay.converter(t, c), lay.converter_vars.pconv);
      sol.conv_loss[t][c] = value(lay.converter(t, c), lay.converter_vars.ploss);
      sol.conv_p_dc[t][c] = value(lay.converter(t, c), lay.converter_vars.pdc);
    }
    for (int s = 0; s < lay.n_battery; ++s) {
      sol.charge_mw[t][s] = value(lay.battery(t, s), lay.battery_vars.pch);
      sol.discharge_mw[t][s] = value(lay.battery(t, s), lay.battery_vars.pdis);
      sol.soc_mwh[t][s] = value(lay.battery(t, s), lay.battery_vars.soc);
      sol.indicator[t][s] = value(lay.battery(t, s), lay.battery_vars.z);
    }
  }
  for (int s = 0; s < lay.n_battery; ++s) {
    sol.sizes_mwh[s] = lay.n_battery > 0 ? value(lay.battery(0, s), lay.battery_vars.bs) : 0.0;
  }

  const auto objectives = evaluate_objectives(data, sol);
  sol.total_cost = objectives.first;
  sol.total_loss_mwh = objectives.second;
  return sol;
}

std::pair<double, double> evaluate_objectives(const CaseData& data,
                                              const OperatingSolution& sol) {
  const int T = sol.horizon;
  if (T != data.horizon) throw std::invalid_argument("evaluate_objectives: horizon mismatch");

  double cost = 0.0;
  for (std::size_t s = 0; s < data.batteries.size(); ++s) {
    cost += data.batteries[s].install_rate * sol.sizes_mwh[s];
  }
  for (int t = 0; t < T; ++t) {
    if (sol.gen_p[t].size() != data.generators.size()) {
      throw std::invalid_argument("evaluate_objectives: generator table mismatch");
    }
    const double fuel_f = data.schedule.fuel_cost[t];
    for (std::size_t g = 0; g < data.generators.size(); ++g) {
      const Generator& gen = data.generators[g];
      const double p = sol.gen_p[t][g];
      cost += fuel_f * (gen.cost_a * p * p + gen.cost_b * p + gen.cost_c);
    }
    for (std::size_t s = 0; s < data.batteries.size(); ++s) {
      cost += data.batteries[s].operation_rate *
              (sol.charge_mw[t][s] + sol.discharge_mw[t][s]);
    }
  }

  double loss = 0.0;
  const double base = data.mva_base;
  for (int t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < data.converters.size(); ++c) loss += base * sol.conv_loss[t][c];
    for (std::size_t e = 0; e < data.ac_branches.size(); ++e) {
      const AcBranch& br = data.ac_branches[e];
      const int from = data.ac_bus_index(br.from);
      const int to = data.ac_bus_index(br.to);
      loss += base * br.g() *
              (sol.c_diag[t][from] + sol.c_diag[t][to] - 2.0 * sol.c_off[t][e]);
    }
    for (std::size_t e = 0; e < data.dc_branches.size(); ++e) {
      const DcBranch& br = data.dc_branches[e];
      const int from = data.dc_bus_index(br.from);
      const int to = data.dc_bus_index(br.to);
      loss += base * br.g() *
              (sol.v_diag[t][from] + sol.v_diag[t][to] - 2.0 * sol.v_off[t][e]);
    }
  }
  return {cost, loss};
}

std::pair<VoltageProfile, ExactnessReport> recover_voltages(const CaseData& data,
                                                            const OperatingSolution& sol) {
  const int T = sol.horizon;
  const int nb = static_cast<int>(data.ac_buses.size());
  const int ne = static_cast<int>(data.ac_branches.size());
  VoltageProfile profile;
  ExactnessReport report;
  profile.ac_magnitude.assign(T, std::vector<double>(nb, 0.0));
  profile.ac_angle.assign(T, std::vector<double>(nb, 0.0));
  profile.dc_voltage.assign(T, std::vector<double>(data.dc_buses.size(), 0.0));
  report.ac_gap.assign(T, std::vector<double>(ne, 0.0));
  report.dc_gap.assign(T, std::vector<double>(data.dc_branches.size(), 0.0));
  report.cycle_mismatch.assign(T, std::vector<double>(ne, 0.0));

  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < nb; ++i) {
      const double cii = sol.c_diag[t][i];
      if (cii < -1e-6) {
        throw std::runtime_error("recover_voltages: negative squared voltage at AC bus " +
                                 std::to_string(data.ac_buses[i].id));
      }
      profile.ac_magnitude[t][i] = std::sqrt(std::max(cii, 0.0));
    }
    for (std::size_t i = 0; i < data.dc_buses.size(); ++i) {
      const double vii = sol.v_diag[t][i];
      if (vii < -1e-6) {
        throw std::runtime_error("recover_voltages: negative squared voltage at DC bus " +
                                 std::to_string(data.dc_buses[i].id));
      }
      profile.dc_voltage[t][i] = std::sqrt(std::max(vii, 0.0));
    }

    // Angles over a BFS tree from the first bus; remaining branches report
    // their cycle mismatch.
    std::vector<std::vector<std::pair<int, int>>> adjacent(nb);  // (neighbor, branch)
    for (int e = 0; e < ne; ++e) {
      const AcBranch& br = data.ac_branches[e];
      adjacent[data.ac_bus_index(br.from)].push_back({data.ac_bus_index(br.to), e});
      adjacent[data.ac_bus_index(br.to)].push_back({data.ac_bus_index(br.from), e});
    }
    std::vector<bool> seen(nb, false);
    std::vector<bool> on_tree(ne, false);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = true;
    profile.ac_angle[t][0] = 0.0;
    while (!frontier.empty()) {
      const int at = frontier.front();
      frontier.pop();
      for (const auto& [next, e] : adjacent[at]) {
        if (seen[next]) continue;
        seen[next] = true;
        on_tree[e] = true;
        const AcBranch& br = data.ac_branches[e];
        const bool forward = data.ac_bus_index(br.from) == at;
        const double c = sol.c_off[t][e];
        const double s = forward ? sol.s_off[t][e] : -sol.s_off[t][e];
        profile.ac_angle[t][next] = profile.ac_angle[t][at] + std::atan2(s, c);
        frontier.push(next);
      }
    }
    for (int e = 0; e < ne; ++e) {
      const AcBranch& br = data.ac_branches[e];
      const int from = data.ac_bus_index(br.from);
      const int to = data.ac_bus_index(br.to);
      const double gap = sol.c_diag[t][from] * sol.c_diag[t][to] -
                         sol.c_off[t][e] * sol.c_off[t][e] - sol.s_off[t][e] * sol.s_off[t][e];
      report.ac_gap[t][e] = gap;
      report.max_ac_gap = std::max(report.max_ac_gap, gap);
      if (gap > report.threshold) ++report.flagged;
      if (!on_tree[e]) {
        double mismatch = profile.ac_angle[t][to] - profile.ac_angle[t][from] -
                          std::atan2(sol.s_off[t][e], sol.c_off[t][e]);
        while (mismatch > M_PI) mismatch -= 2.0 * M_PI;
        while (mismatch < -M_PI) mismatch += 2.0 * M_PI;
        report.cycle_mismatch[t][e] = std::abs(mismatch);
        report.max_cycle_mismatch = std::max(report.max_cycle_mismatch, std::abs(mismatch));
      }
    }
    for (std::size_t e = 0; e < data.dc_branches.size(); ++e) {
      const DcBranch& br = data.dc_branches[e];
      const int from = data.dc_bus_index(br.from);
      const int to = data.dc_bus_index(br.to);
      const double gap =
          sol.v_diag[t][from] * sol.v_diag[t][to] - sol.v_off[t][e] * sol.v_off[t][e];
      report.dc_gap[t][e] = gap;
      report.max_dc_gap = std::max(report.max_dc_gap, gap);
      if (gap > report.threshold) ++report.flagged;
    }
  }
  return {profile, report};
}

std::vector<std::vector<BatteryScheduleRow>> battery_schedule(const OperatingSolution& sol) {
  const int nb = sol.charge_mw.empty() ? 0 : static_cast<int>(sol.charge_mw[0].size());
  std::vector<std::vector<BatteryScheduleRow>> out(nb);
  for (int s = 0; s < nb; ++s) {
    out[s].resize(sol.horizon);
    for (int t = 0; t < sol.horizon; ++t) {
      out[s][t].hour = t + 1;
      out[s][t].net_mw = sol.charge_mw[t][s] - sol.discharge_mw[t][s];
      out[s][t].soc_mwh = sol.soc_mwh[t][s];
    }
  }
  return out;
}

PhysicsReport check_physics(const CaseData& data, const OperatingSolution& sol) {
  PhysicsReport report;
  const int T = sol.horizon;
  const double base = data.mva_base;

  for (int t = 0; t < T; ++t) {
    const double load_f = data.schedule.load[t];
    const double wind_f = data.schedule.wind[t];

    for (std::size_t i = 0; i < data.ac_buses.size(); ++i) {
      const AcBus& bus = data.ac_buses[i];
      double p = -bus.pd * load_f;
      double q = -bus.qd * load_f;
      double g_diag = 0.0, b_diag = 0.0;
      for (std::size_t e = 0; e < data.ac_branches.size(); ++e) {
        const AcBranch& br = data.ac_branches[e];
        const int from = data.ac_bus_index(br.from);
        const int to = data.ac_bus_index(br.to);
        if (from != static_cast<int>(i) && to != static_cast<int>(i)) continue;
        const double c = sol.c_off[t][e];
        const double s = (from == static_cast<int>(i)) ? sol.s_off[t][e] : -sol.s_off[t][e];
        p += br.g() * c - br.b() * s;
        q -= br.g() * s + br.b() * c;
        g_diag += br.g();
        b_diag += br.b() + 0.5 * br.charging;
      }
      p -= g_diag * sol.c_diag[t][i];
      q += b_diag * sol.c_diag[t][i];
      for (std::size_t g = 0; g < data.generators.size(); ++g) {
        if (data.ac_bus_index(data.generators[g].bus) == static_cast<int>(i)) {
          p += sol.gen_p[t][g];
          q += sol.gen_q[t][g];
        }
      }
      for (std::size_t c = 0; c < data.converters.size(); ++c) {
        if (data.ac_bus_index(data.converters[c].ac_bus) == static_cast<int>(i)) {
          p += sol.conv_p_ac[t][c];
        }
      }
      for (std::size_t s = 0; s < data.batteries.size(); ++s) {
        if (data.ac_bus_index(data.batteries[s].ac_bus) == static_cast<int>(i)) {
          p -= (sol.charge_mw[t][s] - sol.discharge_mw[t][s]) / base;
        }
      }
      report.max_p_balance = std::max(report.max_p_balance, std::abs(p));
      report.max_q_balance = std::max(report.max_q_balance, std::abs(q));

      const double cii = sol.c_diag[t][i];
      const double lo = bus.vmin * bus.vmin, hi = bus.vmax * bus.vmax;
      report.max_voltage_violation =
          std::max({report.max_voltage_violation, lo - cii, cii - hi});
    }

    for (std::size_t i = 0; i < data.dc_buses.size(); ++i) {
      double balance = 0.0;
      for (const WindFarm& wf : data.wind_farms) {
        if (data.dc_bus_index(wf.dc_bus) == static_cast<int>(i)) {
          balance += wf.nominal_mw / base * wind_f;
        }
      }
      for (std::size_t e = 0; e < data.dc_branches.size(); ++e) {
        const DcBranch& br = data.dc_branches[e];
        const int from = data.dc_bus_index(br.from);
        const int to = data.dc_bus_index(br.to);
        if (from != static_cast<int>(i) && to != static_cast<int>(i)) continue;
        balance += br.g() * (sol.v_off[t][e] - sol.v_diag[t][i]);
      }
      for (std::size_t c = 0; c < data.converters.size(); ++c) {
        if (data.dc_bus_index(data.converters[c].dc_bus) == static_cast<int>(i)) {
          balance -= sol.conv_p_dc[t][c];
        }
      }
      report.max_dc_balance = std::max(report.max_dc_balance, std::abs(balance));

      const DcBus& bus = data.dc_buses[i];
      const double vii = sol.v_diag[t][i];
      const double lo = bus.vmin * bus.vmin, hi = bus.vmax * bus.vmax;
      report.max_voltage_violation =
          std::max({report.max_voltage_violation, lo - vii, vii - hi});
    }

    for (std::size_t c = 0; c < data.converters.size(); ++c) {
      const Converter& conv = data.converters[c];
      const double pconv = sol.conv_p_ac[t][c];
      const double ploss = sol.conv_loss[t][c];
      const double pdc = sol.conv_p_dc[t][c];
      report.max_converter_balance =
          std::max(report.max_converter_balance, std::abs(pconv + ploss - pdc));
      report.max_loss_gap =
          std::max(report.max_loss_gap, std::abs(ploss - conv.beta * std::abs(pdc)));
      const int db = data.dc_bus_index(conv.dc_bus);
      const double vdd = sol.v_diag[t][db];
      const double droop = conv.k * pconv + conv.d;
      report.max_droop_violation =
          std::max(report.max_droop_violation, droop * droop - vdd);
      report.droop_slack =
          std::max(report.droop_slack, std::abs(droop - std::sqrt(std::max(vdd, 0.0))));
    }

    for (std::size_t s = 0; s < data.batteries.size(); ++s) {
      const Battery& bat = data.batteries[s];
      const double soc = sol.soc_mwh[t][s];
      const double bs = sol.sizes_mwh[s];
      report.max_soc_violation = std::max({report.max_soc_violation, -soc, soc - bs});
      if (t == T - 1) {
        report.max_soc_violation =
            std::max(report.max_soc_violation, bat.soc_terminal_min - soc);
      }
      const double prev = (t == 0) ? bat.soc_initial : sol.soc_mwh[t - 1][s];
      const double expected =
          prev + bat.eta_charge * sol.charge_mw[t][s] - bat.eta_discharge * sol.discharge_mw[t][s];
      report.max_soc_dynamics = std::max(report.max_soc_dynamics, std::abs(soc - expected));
      report.max_exclusivity = std::max(
          report.max_exclusivity, std::min(sol.charge_mw[t][s], sol.discharge_mw[t][s]));
    }

    for (std::size_t e = 0; e < data.ac_branches.size(); ++e) {
      const AcBranch& br = data.ac_branches[e];
      const int from = data.ac_bus_index(br.from);
      const int to = data.ac_bus_index(br.to);
      const double gap = sol.c_diag[t][from] * sol.c_diag[t][to] -
                         sol.c_off[t][e] * sol.c_off[t][e] - sol.s_off[t][e] * sol.s_off[t][e];
      report.max_ac_cone_gap = std::max(report.max_ac_cone_gap, gap);
    }
    for (std::size_t e = 0; e < data.dc_branches.size(); ++e) {
      const DcBranch& br = data.dc_branches[e];
      const int from = data.dc_bus_index(br.from);
      const int to = data.dc_bus_index(br.to);
      const double gap =
          sol.v_diag[t][from] * sol.v_diag[t][to] - sol.v_off[t][e] * sol.v_off[t][e];
      report.max_dc_cone_gap = std::max(report.max_dc_cone_gap, gap);
    }
  }
  return report;
}

}  // namespace gridsoc
