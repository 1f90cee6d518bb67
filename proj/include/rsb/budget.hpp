#pragma once

/*!
  \file budget.hpp
  \brief From optimal circulation potentials back to gate slacks and a legal retiming.

  Pipeline: split_graph -> expand -> solve_mcf -> residual_potentials ->
  recover_duals -> recover_slacks -> snap_levels -> finalize.
*/

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "circuit.hpp"
#include "flow_transform.hpp"
#include "mcf.hpp"
#include "power.hpp"
#include "retiming.hpp"

namespace rsb
{

/* slack assignment */

struct SlackAssignment
{
  std::vector<int> level; ///< 0-based index into each gate's curve
  std::vector<Time> slack;
  std::vector<std::int64_t> power;

  std::int64_t total_power() const
  {
    return std::accumulate( power.begin(), power.end(), std::int64_t{ 0 } );
  }
  Time total_slack() const { return std::accumulate( slack.begin(), slack.end(), Time{ 0 } ); }

  std::vector<Time> effective_delays( Circuit const& c ) const
  {
    auto eff = c.delays();
    for ( auto i = 0u; i < eff.size(); ++i )
      eff[i] += slack[i];
    return eff;
  }

  bool operator==( SlackAssignment const& ) const = default;
};

inline SlackAssignment make_assignment( std::vector<PowerSlackCurve> const& curves, std::vector<int> levels )
{
  SlackAssignment a;
  a.level = std::move( levels );
  for ( auto i = 0u; i < curves.size(); ++i )
  {
    auto const& l = curves[i].levels.at( a.level.at( i ) );
    a.slack.push_back( l.slack );
    a.power.push_back( l.power );
  }
  return a;
}

inline SlackAssignment min_slack_assignment( std::vector<PowerSlackCurve> const& curves )
{
  return make_assignment( curves, std::vector<int>( curves.size(), 0 ) );
}

/* dual recovery */

struct Duals
{
  std::vector<Time> mu;      ///< per dual-graph node, in [0, Nbar]
  std::vector<Time> tension; ///< mu_to - mu_from per dual edge
  std::vector<Time> slack;   ///< tension clamped to the edge's upper bound
  bool reversed{ false };    ///< true if mu = d had to be used instead of mu = Nbar - d
};

/*! \brief Labels and edge slacks from residual shortest-path distances.
 *
 * With distances d from v0, the preferred reading is mu = Nbar - d, giving
 * tension d_i - d_j on edge (i, j). The mirrored reading mu = d is tried
 * if the first violates a lower bound. Throws if neither satisfies every
 * edge lower bound and the label box.
 */
inline Duals recover_duals( DualGraph const& g, Potentials const& pot )
{
  auto const nodes = g.num_nodes();
  if ( static_cast<int>( pot.dist.size() ) != nodes )
    throw std::invalid_argument( "recover_duals: potential count mismatch" );

  auto attempt = [&]( bool reversed ) -> std::optional<Duals> {
    Duals du;
    du.reversed = reversed;
    du.mu.resize( nodes );
    for ( auto v = 0; v < nodes; ++v )
      du.mu[v] = reversed ? pot.dist[v] : g.nff_bar - pot.dist[v];
    du.mu[g.source()] = 0;
    for ( auto v = 0; v < 2 * g.num_gates; ++v )
      if ( du.mu[v] < 0 || du.mu[v] > g.nff_bar )
        return std::nullopt;
    for ( auto const& e : g.edges )
    {
      auto t = du.mu[e.to] - du.mu[e.from];
      if ( e.cls != EdgeClass::E4 && t < e.lower )
        return std::nullopt;
      du.tension.push_back( t );
      du.slack.push_back( std::min( t, e.upper ) );
    }
    return du;
  };

  if ( auto du = attempt( false ) )
    return *du;
  if ( auto du = attempt( true ) )
    return *du;

  std::ostringstream os;
  os << "recover_duals: no orientation of the potentials satisfies the dual constraints; d =";
  for ( auto v : pot.dist )
    os << ' ' << v;
  throw std::logic_error( os.str() );
}

struct RecoveredSlacks
{
  std::vector<Time> sbar;  ///< per gate effective delay d + s (continuous relaxation)
  std::vector<Time> theta; ///< from the gate's E1 edge
  std::vector<Time> omega; ///< min over fanin E2 edges of t + T w (max() if no fanin)
};

/*! \brief sbar_j = min(min over fanins (t_ij + T w_ij), theta_j), floored at the first level. */
inline RecoveredSlacks recover_slacks( DualGraph const& g, Duals const& du )
{
  auto const n = g.num_gates;
  RecoveredSlacks out;
  out.theta.assign( n, 0 );
  out.omega.assign( n, std::numeric_limits<Time>::max() );
  for ( auto k = 0u; k < g.edges.size(); ++k )
  {
    auto const& e = g.edges[k];
    if ( e.cls == EdgeClass::E1 )
      out.theta[e.gate] = du.slack[k];
    else if ( e.cls == EdgeClass::E2 )
      out.omega[e.gate] = std::min( out.omega[e.gate], du.slack[k] + g.period * e.ff );
  }
  out.sbar.resize( n );
  for ( auto j = 0; j < n; ++j )
  {
    auto const floor = g.delays[j] + g.curves[j].front().slack;
    out.sbar[j] = std::max( floor, std::min( out.theta[j], out.omega[j] ) );
  }
  return out;
}

/*! \brief Largest level not exceeding sbar_j - d_j for every gate. */
inline SlackAssignment snap_levels( std::vector<Time> const& delays, std::vector<Time> const& sbar,
                                    std::vector<PowerSlackCurve> const& curves )
{
  std::vector<int> levels( curves.size(), 0 );
  for ( auto j = 0u; j < curves.size(); ++j )
  {
    auto const budget = sbar[j] - delays[j];
    auto const& lv = curves[j].levels;
    for ( auto q = 0u; q < lv.size(); ++q )
      if ( lv[q].slack <= budget )
        levels[j] = static_cast<int>( q );
  }
  return make_assignment( curves, std::move( levels ) );
}

/* finalization */

struct BudgetDiagnostics
{
  std::vector<Time> mu;
  std::vector<Time> sbar;
  std::vector<Time> theta;
  std::vector<Time> omega;
  bool reversed_potentials{ false };
  std::int64_t flow_cost{ 0 };
  SolverStats solver;
  int repair_steps{ 0 };
  double runtime_ms{ 0.0 };
};

struct BudgetResult
{
  SlackAssignment assignment;
  Retiming retiming;
  Time period{ 0 };
  Time achieved_period{ 0 };
  BudgetDiagnostics diagnostics;
};

/*! \brief Makes `assignment` realizable at `period` and computes its retiming.
 *
 * While no legal retiming meets the period, the slack level of the gate with
 * the worst negative slack under the search's last labelling is lowered
 * (ties: larger power saving first, then smaller gate id). Gates already at
 * their first level are skipped. Terminates because the all-first-level
 * assignment is feasible whenever period >= Tmin; throws otherwise.
 */
inline BudgetResult finalize( Circuit const& c, Time period, SlackAssignment assignment, std::vector<PowerSlackCurve> const& curves )
{
  if ( !feasible_retiming( c, period, min_slack_assignment( curves ).effective_delays( c ) ) )
    throw InputError( "period infeasible even at minimum slack" );

  BudgetResult out;
  out.period = period;
  while ( true )
  {
    auto eff = assignment.effective_delays( c );
    auto attempt = retime_for_period( c, period, eff );
    if ( attempt.feasible )
    {
      out.retiming = std::move( attempt.r );
      out.achieved_period = sta( apply_retiming( c, out.retiming ), period, eff ).max_arrival();
      break;
    }

    auto const rep = sta( apply_retiming( c, attempt.r ), period, eff );
    auto pick = [&]( bool negative_only ) {
      int best = -1;
      std::int64_t best_saving = 0;
      for ( auto i = 0; i < c.num_gates(); ++i )
      {
        auto const q = assignment.level[i];
        if ( q == 0 || ( negative_only && rep.slack[i] >= 0 ) )
          continue;
        auto const saving = curves[i].levels[q - 1].power - curves[i].levels[q].power;
        if ( best < 0 || rep.slack[i] < rep.slack[best] || ( rep.slack[i] == rep.slack[best] && saving > best_saving ) )
        {
          best = i;
          best_saving = saving;
        }
      }
      return best;
    };
    auto gate = pick( true );
    if ( gate < 0 )
      gate = pick( false );
    if ( gate < 0 )
      throw std::logic_error( "finalize: no slack left to remove but period still violated" );

    auto levels = assignment.level;
    --levels[gate];
    assignment = make_assignment( curves, std::move( levels ) );
    ++out.diagnostics.repair_steps;
  }
  out.assignment = std::move( assignment );
  return out;
}

/* end-to-end */

struct BudgetOptions
{
  std::optional<Time> period;
  std::optional<std::int64_t> nff;
};

/*! \brief Minimum period with every gate at its first slack level. */
inline MinPeriodResult min_period( Circuit const& c, std::vector<PowerSlackCurve> const& curves )
{
  return min_period( c, min_slack_assignment( curves ).effective_delays( c ) );
}

/*! \brief Label budget large enough for the relaxation at `period` to be feasible:
 *  at least the total FF count and one more than the largest label of a
 *  retiming that meets `period` with every gate at its first level.
 */
inline std::int64_t safe_nff( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves )
{
  auto nff = default_nff( c );
  if ( auto r = feasible_retiming( c, period, min_slack_assignment( curves ).effective_delays( c ) ) )
    nff = std::max( nff, *std::max_element( r->r.begin(), r->r.end() ) + 1 );
  return nff;
}

inline BudgetResult run_budget( Circuit const& c, std::vector<PowerSlackCurve> const& curves, BudgetOptions const& opts = {} )
{
  auto const t0 = std::chrono::steady_clock::now();
  for ( auto const& curve : curves )
    validate_curve( curve );

  auto const period = opts.period ? *opts.period : min_period( c, curves ).period;
  auto const g = split_graph( c, period, curves, opts.nff.value_or( safe_nff( c, period, curves ) ) );
  auto const net = expand( g );
  auto const sol = solve_mcf( net );
  auto const pot = residual_potentials( net, sol, g.source() );
  auto const du = recover_duals( g, pot );
  auto const rec = recover_slacks( g, du );
  auto assignment = snap_levels( g.delays, rec.sbar, curves );

  auto result = finalize( c, period, std::move( assignment ), curves );
  auto& diag = result.diagnostics;
  diag.mu = du.mu;
  diag.sbar = rec.sbar;
  diag.theta = rec.theta;
  diag.omega = rec.omega;
  diag.reversed_potentials = du.reversed;
  diag.flow_cost = sol.cost;
  diag.solver = sol.stats;
  diag.runtime_ms = std::chrono::duration<double, std::milli>( std::chrono::steady_clock::now() - t0 ).count();
  return result;
}

/*! \brief Independent re-check of a result: empty string when sound, otherwise the first problem found. */
inline std::string verify_result( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves, BudgetResult const& r )
{
  auto const n = c.num_gates();
  auto const& a = r.assignment;
  if ( static_cast<int>( a.level.size() ) != n || static_cast<int>( a.slack.size() ) != n || static_cast<int>( a.power.size() ) != n )
    return "assignment size mismatch";
  for ( auto i = 0; i < n; ++i )
  {
    auto const& lv = curves[i].levels;
    auto on_grid = std::any_of( lv.begin(), lv.end(), [&]( Level const& l ) { return l.slack == a.slack[i] && l.power == a.power[i]; } );
    if ( !on_grid )
      return "gate " + c.gate( i ).name + " slack is not a curve level";
  }
  if ( !is_legal( c, r.retiming ) )
    return "illegal retiming";
  auto const retimed = apply_retiming( c, r.retiming );
  if ( !period_feasible( retimed, period, a.effective_delays( c ) ) )
    return "period violated after retiming";
  return {};
}

/* reports */

inline nlohmann::json result_to_json( Circuit const& c, BudgetResult const& r )
{
  nlohmann::json doc;
  doc["period"] = r.period;
  doc["achieved_period"] = r.achieved_period;
  doc["total_power"] = r.assignment.total_power();
  doc["total_slack"] = r.assignment.total_slack();
  doc["repair_steps"] = r.diagnostics.repair_steps;
  doc["runtime_ms"] = r.diagnostics.runtime_ms;
  auto gates = nlohmann::json::array();
  for ( auto i = 0; i < c.num_gates(); ++i )
  {
    gates.push_back( { { "name", c.gate( i ).name },
                       { "slack", r.assignment.slack[i] },
                       { "power", r.assignment.power[i] },
                       { "retiming", r.retiming.r[i] } } );
  }
  doc["gates"] = std::move( gates );
  return doc;
}

} // namespace rsb
