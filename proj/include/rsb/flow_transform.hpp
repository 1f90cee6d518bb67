#pragma once

/*!
  \file flow_transform.hpp
  \brief Split-vertex dual graph and its expansion into a min-cost circulation.

  Every gate i becomes two nodes: rbar_i (scaled retiming label) and Rbar_i
  (scaled retiming label plus arrival). Edge classes:

  - E1  rbar_i -> Rbar_i     slack of gate i (effective delay d_i + s_i)
  - E2  Rbar_i -> Rbar_j     arrival propagation along circuit edge (i, j)
  - E3  rbar_i -> rbar_j     retiming legality along circuit edge (i, j)
  - E4  v0 -> every node     label bounds [0, Nbar]

  Each edge (i, j) carries a tension s_ij <= mu_j - mu_i with a convex
  decreasing cost. The Lagrangian dual is a circulation with convex
  piecewise-linear arc costs; `expand` turns every breakpoint segment into
  a parallel arc so a linear min-cost circulation solver applies.
*/

#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "circuit.hpp"
#include "power.hpp"

namespace rsb
{

enum class EdgeClass
{
  E1,
  E2,
  E3,
  E4
};

inline char const* to_string( EdgeClass cls )
{
  switch ( cls )
  {
  case EdgeClass::E1:
    return "E1";
  case EdgeClass::E2:
    return "E2";
  case EdgeClass::E3:
    return "E3";
  case EdgeClass::E4:
    return "E4";
  }
  return "?";
}

struct DualEdge
{
  EdgeClass cls{ EdgeClass::E1 };
  int from{ 0 };
  int to{ 0 };
  Time lower{ 0 };
  Time upper{ 0 };
  int gate{ -1 };         ///< owner of the cost curve (E1: i, E2: j), -1 otherwise
  int circuit_edge{ -1 }; ///< E2/E3 only
  Time shift{ 0 };        ///< level abscissa offset: slack s^q sits at s^q + shift
  std::int64_t kappa{ 1 };
  std::int64_t ff{ 0 };   ///< FF count of the circuit edge (E2/E3)
};

struct DualGraph
{
  int num_gates{ 0 };
  Time period{ 0 };
  std::int64_t nff{ 0 };
  Time nff_bar{ 0 };
  std::vector<Time> delays;
  std::vector<DualEdge> edges;
  std::vector<PowerSlackCurve> curves; ///< per gate, as given
  std::vector<QCurve> qcurves;         ///< per gate, used on E1

  int num_nodes() const { return 2 * num_gates + 1; }
  int r_node( int gate ) const { return gate; }
  int R_node( int gate ) const { return num_gates + gate; }
  int source() const { return 2 * num_gates; }

  /*! \brief Cost curve of an E1/E2 edge as (tension, cost) points. */
  std::vector<std::pair<Time, Rational>> cost_points( DualEdge const& e ) const
  {
    std::vector<std::pair<Time, Rational>> pts;
    if ( e.cls == EdgeClass::E1 )
    {
      for ( auto const& l : qcurves[e.gate].curve.levels )
        pts.emplace_back( l.slack + e.shift, Rational( l.power ) );
    }
    else if ( e.cls == EdgeClass::E2 )
    {
      for ( auto const& l : curves[e.gate].levels )
        pts.emplace_back( l.slack + e.shift, Rational( l.power, e.kappa ) );
    }
    return pts;
  }
};

/*! \brief Default FF budget for label bounds: total FF count, at least 1. */
inline std::int64_t default_nff( Circuit const& c )
{
  return std::max<std::int64_t>( 1, c.total_ffs() );
}

inline DualGraph split_graph( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves, std::int64_t nff )
{
  auto const n = c.num_gates();
  if ( static_cast<int>( curves.size() ) != n )
    throw std::invalid_argument( "split_graph: one curve per gate required" );
  if ( nff < 1 )
    throw std::invalid_argument( "split_graph: N_ff must be >= 1" );

  DualGraph g;
  g.num_gates = n;
  g.period = period;
  g.nff = nff;
  g.nff_bar = nff * period;
  g.curves = curves;
  g.delays = c.delays();
  for ( auto i = 0; i < n; ++i )
  {
    g.qcurves.push_back( q_transform( curves[i] ) );
    if ( c.gate( i ).delay + curves[i].front().slack > period )
      throw InputError( "period " + std::to_string( period ) + " is below the minimum effective delay of gate " + c.gate( i ).name );
  }

  for ( auto i = 0; i < n; ++i )
  {
    auto const d = c.gate( i ).delay;
    g.edges.push_back( { EdgeClass::E1, g.r_node( i ), g.R_node( i ), d + curves[i].front().slack, d + curves[i].back().slack, i, -1, d, 1 } );
  }
  for ( auto e = 0; e < c.num_edges(); ++e )
  {
    auto const& ed = c.edge( e );
    auto const j = ed.dst;
    auto const shift = c.gate( j ).delay - period * ed.ff;
    g.edges.push_back( { EdgeClass::E2, g.R_node( ed.src ), g.R_node( j ), curves[j].front().slack + shift,
                         curves[j].back().slack + shift, j, e, shift, penalty_divisor( c, j ), ed.ff } );
  }
  for ( auto e = 0; e < c.num_edges(); ++e )
  {
    auto const& ed = c.edge( e );
    g.edges.push_back( { EdgeClass::E3, g.r_node( ed.src ), g.r_node( ed.dst ), -period * ed.ff, g.nff_bar, -1, e, 0, 1, ed.ff } );
  }
  for ( auto v = 0; v < 2 * n; ++v )
    g.edges.push_back( { EdgeClass::E4, g.source(), v, 0, g.nff_bar, -1, -1, 0, 1 } );
  return g;
}

inline DualGraph split_graph( Circuit const& c, Time period, std::vector<PowerSlackCurve> const& curves )
{
  return split_graph( c, period, curves, default_nff( c ) );
}

/* expanded network */

struct Arc
{
  int src{ 0 };
  int dst{ 0 };
  std::int64_t cost{ 0 };
  std::int64_t lower{ 0 };
  std::int64_t upper{ 0 };
  int dual_edge{ -1 }; ///< index into DualGraph::edges, -1 if unknown
  int segment{ 0 };    ///< breakpoint segment (E1/E2), 0/1 for the E4 pair

  bool operator==( Arc const& ) const = default;
};

struct FlowNetwork
{
  int num_nodes{ 0 };
  std::vector<Arc> arcs;
  std::int64_t scale{ 1 }; ///< capacity scale D
  std::int64_t m_cap{ 0 }; ///< capacity big-M (unscaled)
  std::int64_t m_cost{ 0 };
  Time nff_bar{ 0 };
  int source{ 0 };

  bool operator==( FlowNetwork const& ) const = default;
};

namespace detail
{

inline std::int64_t checked_mul( std::int64_t a, std::int64_t b )
{
  std::int64_t out{};
  if ( __builtin_mul_overflow( a, b, &out ) )
    throw std::overflow_error( "flow network: 64-bit overflow in capacity/cost scaling" );
  return out;
}

inline std::int64_t ceil_rational( Rational const& x )
{
  auto q = x.numerator() / x.denominator();
  if ( q * x.denominator() < x.numerator() )
    ++q;
  return q;
}

} // namespace detail

/*! \brief Capacity scale: lcm over E1/E2 edges of (segment width x penalty divisor),
 *  which makes every scaled slope capacity integral.
 */
inline std::int64_t capacity_scale( DualGraph const& g )
{
  std::int64_t d = 1;
  for ( auto const& e : g.edges )
  {
    if ( e.cls != EdgeClass::E1 && e.cls != EdgeClass::E2 )
      continue;
    auto const& lv = g.curves[e.gate].levels;
    for ( auto q = 1u; q < lv.size(); ++q )
    {
      auto width = detail::checked_mul( lv[q].slack - lv[q - 1].slack, e.kappa );
      d = std::lcm( d, width );
      if ( d <= 0 || d > ( std::int64_t{ 1 } << 40 ) )
        throw std::overflow_error( "flow network: capacity scale too large" );
    }
  }
  return d;
}

inline FlowNetwork expand( DualGraph const& g )
{
  FlowNetwork net;
  net.num_nodes = g.num_nodes();
  net.source = g.source();
  net.nff_bar = g.nff_bar;
  net.scale = capacity_scale( g );

  /* slope magnitudes per E1/E2 edge */
  std::vector<std::vector<Rational>> slopes( g.edges.size() );
  Rational finite_total = 0;
  Rational slope_total = 0;
  for ( auto k = 0u; k < g.edges.size(); ++k )
  {
    auto const& e = g.edges[k];
    if ( e.cls != EdgeClass::E1 && e.cls != EdgeClass::E2 )
      continue;
    auto pts = g.cost_points( e );
    for ( auto q = 1u; q < pts.size(); ++q )
      slopes[k].push_back( ( pts[q - 1].second - pts[q].second ) / Rational( pts[q].first - pts[q - 1].first ) );
    if ( !slopes[k].empty() )
    {
      finite_total += slopes[k].front();
      if ( e.cls == EdgeClass::E1 )
        slope_total += slopes[k].front();
    }
  }
  net.m_cap = 1 + detail::ceil_rational( finite_total );
  net.m_cost = 1 + detail::ceil_rational( slope_total );
  auto const big = detail::checked_mul( net.m_cap, net.scale );

  auto scaled = [&]( Rational const& x ) {
    auto v = x * Rational( net.scale );
    if ( v.denominator() != 1 )
      throw std::logic_error( "expand: capacity not integral after scaling" );
    if ( v < 0 )
      throw std::logic_error( "expand: negative capacity (non-convex curve)" );
    return v.numerator();
  };

  for ( auto k = 0u; k < g.edges.size(); ++k )
  {
    auto const& e = g.edges[k];
    auto const id = static_cast<int>( k );
    switch ( e.cls )
    {
    case EdgeClass::E1:
    case EdgeClass::E2:
    {
      auto pts = g.cost_points( e );
      auto const& b = slopes[k];
      auto const levels = static_cast<int>( pts.size() );
      /* segment q (1-based level index) has cost -tension(q); capacities
         b(L), b(L-1) - b(L), ..., M - b(2) */
      for ( auto q = levels; q >= 1; --q )
      {
        std::int64_t cap{};
        if ( q == 1 )
          cap = big - ( b.empty() ? 0 : scaled( b.front() ) );
        else if ( q == levels )
          cap = scaled( b[q - 2] );
        else
          cap = scaled( b[q - 2] - b[q - 1] );
        if ( cap < 0 )
          throw std::logic_error( "expand: negative capacity (non-convex curve)" );
        net.arcs.push_back( { e.from, e.to, -pts[q - 1].first, 0, cap, id, q } );
      }
      break;
    }
    case EdgeClass::E3:
      net.arcs.push_back( { e.from, e.to, -e.lower, 0, big, id, 0 } );
      break;
    case EdgeClass::E4:
      /* (Nbar, -M, 0) rewritten as a reverse arc, and (0, 0, M) */
      net.arcs.push_back( { e.to, e.from, -g.nff_bar, 0, big, id, 0 } );
      net.arcs.push_back( { e.from, e.to, 0, 0, big, id, 1 } );
      break;
    }
  }
  return net;
}

/* DIMACS min-cost-flow text */

inline void write_dimacs( std::ostream& os, FlowNetwork const& net )
{
  os << "c min-cost circulation, capacity scale " << net.scale << ", source node " << net.source + 1 << '\n';
  os << "p min " << net.num_nodes << ' ' << net.arcs.size() << '\n';
  for ( auto const& a : net.arcs )
    os << "a " << a.src + 1 << ' ' << a.dst + 1 << ' ' << a.lower << ' ' << a.upper << ' ' << a.cost << '\n';
}

inline std::string to_dimacs( FlowNetwork const& net )
{
  std::ostringstream os;
  write_dimacs( os, net );
  return os.str();
}

/*! \brief Reads `p min`, `n` and `a` records; only circulations (zero supplies) are accepted. */
inline FlowNetwork read_dimacs( std::istream& is )
{
  FlowNetwork net;
  bool have_problem = false;
  std::string line;
  int lineno = 0;
  auto fail = [&]( std::string const& msg ) { throw InputError( "dimacs line " + std::to_string( lineno ) + ": " + msg ); };
  while ( std::getline( is, line ) )
  {
    ++lineno;
    std::istringstream ls( line );
    std::string kind;
    if ( !( ls >> kind ) || kind == "c" )
      continue;
    if ( kind == "p" )
    {
      std::string type;
      std::size_t arcs{};
      if ( !( ls >> type >> net.num_nodes >> arcs ) || type != "min" || net.num_nodes < 1 )
        fail( "malformed problem line" );
      net.arcs.reserve( arcs );
      have_problem = true;
    }
    else if ( kind == "n" )
    {
      int id{};
      std::int64_t supply{};
      if ( !( ls >> id >> supply ) )
        fail( "malformed node line" );
      if ( supply != 0 )
        fail( "nonzero supply: only circulations are supported" );
    }
    else if ( kind == "a" )
    {
      if ( !have_problem )
        fail( "arc before problem line" );
      Arc a;
      if ( !( ls >> a.src >> a.dst >> a.lower >> a.upper >> a.cost ) )
        fail( "malformed arc line" );
      --a.src;
      --a.dst;
      if ( a.src < 0 || a.dst < 0 || a.src >= net.num_nodes || a.dst >= net.num_nodes )
        fail( "arc endpoint out of range" );
      if ( a.lower > a.upper )
        fail( "lower bound exceeds upper bound" );
      net.arcs.push_back( a );
    }
    else
    {
      fail( "unknown record '" + kind + "'" );
    }
  }
  if ( !have_problem )
    throw InputError( "dimacs: missing problem line" );
  return net;
}

} // namespace rsb
