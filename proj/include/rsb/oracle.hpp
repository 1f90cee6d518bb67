#pragma once

/*!
  \file oracle.hpp
  \brief Exponential-time reference solvers for tiny instances.

  Nothing here shares code with the flow pipeline beyond the circuit model
  and the curve evaluator: retimings are enumerated label by label, slack
  assignments level by level.
*/

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "budget.hpp"
#include "circuit.hpp"
#include "power.hpp"
#include "retiming.hpp"

namespace rsb::oracle
{

namespace detail
{

/* vertices in BFS order over the undirected graph; component roots flagged */
struct SearchOrder
{
  std::vector<int> order;
  std::vector<char> is_root;
};

inline SearchOrder search_order( Circuit const& c )
{
  auto const n = c.num_gates();
  SearchOrder so;
  so.is_root.assign( n, 0 );
  std::vector<char> seen( n, 0 );
  for ( auto s = 0; s < n; ++s )
  {
    if ( seen[s] )
      continue;
    seen[s] = 1;
    so.is_root[s] = 1;
    auto head = so.order.size();
    so.order.push_back( s );
    for ( ; head < so.order.size(); ++head )
    {
      auto v = so.order[head];
      auto visit = [&]( int u ) {
        if ( !seen[u] )
        {
          seen[u] = 1;
          so.order.push_back( u );
        }
      };
      for ( auto e : c.fanout( v ) )
        visit( c.edge( e ).dst );
      for ( auto e : c.fanin( v ) )
        visit( c.edge( e ).src );
    }
  }
  return so;
}

/* Enumerates legal labellings with each component root at 0 and every other
 * label in [-|V|, |V|]. `bound` returns the largest acceptable partial period;
 * `leaf` receives each complete labelling with its period and returns false
 * to stop the search. */
class RetimingEnumerator
{
public:
  RetimingEnumerator( Circuit const& c, std::vector<Time> const& eff ) : c_( c ), eff_( eff ), so_( search_order( c ) )
  {
    pos_.assign( c.num_gates(), -1 );
    for ( auto k = 0u; k < so_.order.size(); ++k )
      pos_[so_.order[k]] = static_cast<int>( k );
    r_.assign( c.num_gates(), 0 );
  }

  void run( std::function<Time()> bound, std::function<bool( std::vector<std::int64_t> const&, Time )> leaf )
  {
    bound_ = std::move( bound );
    leaf_ = std::move( leaf );
    stop_ = false;
    dfs( 0 );
  }

private:
  /* longest zero-FF path delay among the first `depth` vertices of the order */
  Time partial_period( int depth ) const
  {
    std::vector<Time> arrival( c_.num_gates(), 0 );
    std::vector<int> indeg( c_.num_gates(), 0 );
    auto assigned = [&]( int v ) { return pos_[v] < depth; };
    auto zero = [&]( int e ) {
      auto const& ed = c_.edge( e );
      return assigned( ed.src ) && assigned( ed.dst ) && ed.ff + r_[ed.dst] - r_[ed.src] == 0;
    };
    for ( auto e = 0; e < c_.num_edges(); ++e )
      if ( zero( e ) )
        ++indeg[c_.edge( e ).dst];
    std::vector<int> queue;
    for ( auto k = 0; k < depth; ++k )
      if ( indeg[so_.order[k]] == 0 )
        queue.push_back( so_.order[k] );
    Time worst = 0;
    for ( auto h = 0u; h < queue.size(); ++h )
    {
      auto v = queue[h];
      arrival[v] += eff_[v];
      worst = std::max( worst, arrival[v] );
      for ( auto e : c_.fanout( v ) )
      {
        if ( !zero( e ) )
          continue;
        auto u = c_.edge( e ).dst;
        arrival[u] = std::max( arrival[u], arrival[v] );
        if ( --indeg[u] == 0 )
          queue.push_back( u );
      }
    }
    return worst;
  }

  bool legal_with_assigned( int v, int depth ) const
  {
    auto ok = [&]( int e ) {
      auto const& ed = c_.edge( e );
      if ( pos_[ed.src] > depth || pos_[ed.dst] > depth )
        return true;
      return ed.ff + r_[ed.dst] - r_[ed.src] >= 0;
    };
    return std::all_of( c_.fanin( v ).begin(), c_.fanin( v ).end(), ok ) &&
           std::all_of( c_.fanout( v ).begin(), c_.fanout( v ).end(), ok );
  }

  void dfs( int depth )
  {
    if ( stop_ )
      return;
    auto const n = c_.num_gates();
    if ( depth == n )
    {
      if ( !leaf_( r_, partial_period( n ) ) )
        stop_ = true;
      return;
    }
    auto const v = so_.order[depth];
    std::int64_t lo = so_.is_root[v] ? 0 : -n;
    std::int64_t hi = so_.is_root[v] ? 0 : n;
    for ( auto label = lo; label <= hi && !stop_; ++label )
    {
      r_[v] = label;
      if ( !legal_with_assigned( v, depth ) )
        continue;
      if ( partial_period( depth + 1 ) > bound_() )
        continue;
      dfs( depth + 1 );
    }
    r_[v] = 0;
  }

  Circuit const& c_;
  std::vector<Time> const& eff_;
  SearchOrder so_;
  std::vector<int> pos_;
  std::vector<std::int64_t> r_;
  std::function<Time()> bound_;
  std::function<bool( std::vector<std::int64_t> const&, Time )> leaf_;
  bool stop_{ false };
};

} // namespace detail

inline constexpr int max_retiming_gates = 8;
inline constexpr int max_budget_gates = 12;
inline constexpr std::size_t max_budget_levels = 4;

/*! \brief Exhaustive search for a legal retiming meeting `period`. */
inline std::optional<Retiming> exhaustive_feasible( Circuit const& c, Time period, std::vector<Time> const& eff )
{
  if ( c.num_gates() > max_retiming_gates )
    throw std::invalid_argument( "oracle: instance too large for exhaustive retiming" );
  std::optional<Retiming> found;
  detail::RetimingEnumerator en( c, eff );
  en.run( [&] { return period; },
          [&]( auto const& r, Time p ) {
            if ( p <= period )
            {
              found = normalized( Retiming{ r } );
              return false;
            }
            return true;
          } );
  return found;
}

/*! \brief Minimum period over all retimings with labels in [-|V|, |V|]. */
inline Time oracle_min_period( Circuit const& c, std::vector<Time> const& eff )
{
  if ( c.num_gates() > max_retiming_gates )
    throw std::invalid_argument( "oracle: instance too large for exhaustive retiming" );
  auto const floor = *std::max_element( eff.begin(), eff.end() );
  auto best = std::numeric_limits<Time>::max();
  detail::RetimingEnumerator en( c, eff );
  en.run( [&] { return best == std::numeric_limits<Time>::max() ? best : best - 1; },
          [&]( auto const&, Time p ) {
            best = std::min( best, p );
            return best > floor;
          } );
  return best;
}

inline Time oracle_min_period( Circuit const& c )
{
  return oracle_min_period( c, c.delays() );
}

struct OracleResult
{
  std::int64_t power{ 0 };
  SlackAssignment assignment;
  Retiming retiming;
};

/*! \brief Minimum-power slack assignment realizable by some retiming at `period`.
 *
 * Depth-first over gates in id order, levels ascending, so the first optimum
 * found is the lexicographically smallest level vector. Branches are cut when
 * the optimistic power bound cannot beat the incumbent or when the partial
 * assignment is already infeasible with all remaining gates at their first
 * level (more slack never helps feasibility). Returns nullopt if even the
 * all-first-level assignment cannot meet the period.
 */
inline std::optional<OracleResult> brute_force( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves )
{
  auto const n = c.num_gates();
  if ( n > max_budget_gates )
    throw std::invalid_argument( "oracle: too many gates for brute force" );
  for ( auto const& curve : curves )
    if ( curve.size() > max_budget_levels )
      throw std::invalid_argument( "oracle: too many slack levels for brute force" );

  std::vector<std::int64_t> floor_power( n + 1, 0 );
  for ( auto i = n - 1; i >= 0; --i )
    floor_power[i] = floor_power[i + 1] + curves[i].back().power;

  std::vector<int> levels( n, 0 );
  std::optional<OracleResult> best;
  auto feasible = [&] {
    auto eff = c.delays();
    for ( auto i = 0; i < n; ++i )
      eff[i] += curves[i].levels[levels[i]].slack;
    return feasible_retiming( c, period, eff );
  };

  std::function<void( int, std::int64_t )> dfs = [&]( int depth, std::int64_t power ) {
    if ( best && power + floor_power[depth] >= best->power )
      return;
    auto r = feasible();
    if ( !r )
      return;
    if ( depth == n )
    {
      best = OracleResult{ power, make_assignment( curves, levels ), std::move( *r ) };
      return;
    }
    for ( auto q = 0; q < static_cast<int>( curves[depth].size() ); ++q )
    {
      levels[depth] = q;
      dfs( depth + 1, power + curves[depth].levels[q].power );
    }
    levels[depth] = 0;
  };
  dfs( 0, 0 );
  return best;
}

/* relaxed problem used to check the Q-curve substitution */

enum class RelaxedForm
{
  bounded_slack, ///< cost P(s) with d + s <= Rbar - rbar <= T
  q_equality     ///< cost Q(Rbar - rbar - d), no explicit Rbar - rbar <= T
};

/*! \brief Optimum of the penalty relaxation over the integer grid.
 *
 * Variables: integer retiming r in [0, N_ff] (legal), arrival a_i in
 * [0, 2T], Rbar_i = T r_i + a_i <= Nbar. Each circuit edge (i, j) pays
 * the best penalty P_j(t + T w - d_j) / kappa_j over integer t with
 * t^1 <= t <= min(Rbar_j - Rbar_i, t^L). Gate terms depend on `form`;
 * in both forms the gate's effective delay may not exceed T.
 */
inline std::optional<Rational> relaxed_optimum( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves, RelaxedForm form,
                                                std::int64_t nff )
{
  auto const n = c.num_gates();
  if ( n > 6 )
    throw std::invalid_argument( "oracle: too many gates for relaxed brute force" );
  auto const nbar = nff * period;
  auto const amax = 2 * period;

  /* gate term per arrival value a in [0, amax], nullopt = infeasible */
  std::vector<std::vector<std::optional<Rational>>> gate_cost( n, std::vector<std::optional<Rational>>( amax + 1 ) );
  for ( auto i = 0; i < n; ++i )
  {
    auto const d = c.gate( i ).delay;
    auto const lo = d + curves[i].front().slack;
    auto const hi = d + curves[i].back().slack;
    auto const q = q_transform( curves[i] );
    for ( Time a = 0; a <= amax; ++a )
    {
      if ( form == RelaxedForm::bounded_slack )
      {
        if ( a > period )
          continue;
        std::optional<Rational> m;
        for ( auto s = lo; s <= std::min( { a, hi, period } ); ++s )
        {
          auto p = eval_power( curves[i], s - d );
          if ( !m || p < *m )
            m = p;
        }
        gate_cost[i][a] = m;
      }
      else if ( a >= lo && a <= period )
      {
        gate_cost[i][a] = q.eval( a - d );
      }
    }
  }

  auto edge_cost = [&]( int e, Time y ) -> std::optional<Rational> {
    auto const& ed = c.edge( e );
    auto const j = ed.dst;
    auto const d = c.gate( j ).delay;
    auto const shift = d - period * ed.ff;
    auto const kappa = penalty_divisor( c, j );
    std::optional<Rational> m;
    for ( auto t = curves[j].front().slack + shift; t <= std::min( y, curves[j].back().slack + shift ); ++t )
    {
      auto p = eval_power( curves[j], t - shift ) / Rational( kappa );
      if ( !m || p < *m )
        m = p;
    }
    return m;
  };

  std::optional<Rational> best;
  std::vector<std::int64_t> r( n, 0 );
  std::vector<Time> a( n, 0 );

  std::function<void( int )> enum_arrivals = [&]( int i ) {
    if ( i == n )
    {
      Rational total = 0;
      for ( auto g = 0; g < n; ++g )
        total += *gate_cost[g][a[g]];
      for ( auto e = 0; e < c.num_edges(); ++e )
      {
        auto const& ed = c.edge( e );
        auto y = ( period * r[ed.dst] + a[ed.dst] ) - ( period * r[ed.src] + a[ed.src] );
        auto cost = edge_cost( e, y );
        if ( !cost )
          return;
        total += *cost;
        if ( best && total >= *best )
          return;
      }
      if ( !best || total < *best )
        best = total;
      return;
    }
    for ( Time v = 0; v <= amax; ++v )
    {
      if ( !gate_cost[i][v] || period * r[i] + v > nbar )
        continue;
      a[i] = v;
      enum_arrivals( i + 1 );
    }
  };

  std::function<void( int )> enum_retimings = [&]( int i ) {
    if ( i == n )
    {
      Retiming rt{ r };
      if ( is_legal( c, rt ) )
        enum_arrivals( 0 );
      return;
    }
    for ( std::int64_t v = 0; v <= nff; ++v )
    {
      r[i] = v;
      enum_retimings( i + 1 );
    }
  };
  enum_retimings( 0 );
  return best;
}

} // namespace rsb::oracle
