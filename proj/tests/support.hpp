#pragma once

#include <algorithm>
#include <random>
#include <sstream>
#include <string>

#include <rsb/budget.hpp>
#include <rsb/commands.hpp>
#include <rsb/flow_transform.hpp>
#include <rsb/mcf.hpp>

namespace rsb::test
{

inline Circuit load_circuit( std::string const& name )
{
  return parse_circuit( cli::read_file( std::string( RSB_DATA_DIR "/" ) + name ) );
}

inline CurveLibrary load_curves( std::string const& name )
{
  return parse_curves( cli::read_file( std::string( RSB_DATA_DIR "/" ) + name ) );
}

/* every curve of the library, fallback first */
inline std::vector<PowerSlackCurve> all_curves( CurveLibrary const& lib )
{
  std::vector<PowerSlackCurve> out;
  if ( lib.fallback )
    out.push_back( *lib.fallback );
  for ( auto const& [name, curve] : lib.named )
    out.push_back( curve );
  return out;
}

/*! \brief Compares the cheapest cost of pushing f units through the parallel
 *  arcs of dual edge `k` against the Lagrangian H evaluated level by level,
 *  for every integer f up to saturation. Empty string on success.
 */
inline std::string check_h_reconstruction( DualGraph const& g, FlowNetwork const& net, int k )
{
  auto const& e = g.edges[k];
  std::vector<Arc> arcs;
  for ( auto const& a : net.arcs )
    if ( a.dual_edge == k )
      arcs.push_back( a );
  std::sort( arcs.begin(), arcs.end(), []( Arc const& a, Arc const& b ) { return a.cost < b.cost; } );

  auto const& levels = e.cls == EdgeClass::E1 ? g.qcurves[e.gate].curve.levels : g.curves[e.gate].levels;
  auto const kappa = e.cls == EdgeClass::E2 ? e.kappa : 1;
  auto H = [&]( Rational const& x ) {
    std::optional<Rational> best;
    for ( auto const& l : levels )
    {
      auto v = Rational( l.power, kappa ) + x * Rational( l.slack + e.shift );
      if ( !best || v < *best )
        best = v;
    }
    return *best;
  };

  auto const h0 = H( 0 );
  std::int64_t flow = 0;
  std::int64_t cost = 0;
  for ( auto const& a : arcs )
  {
    for ( std::int64_t u = 0; u < a.upper; ++u )
    {
      ++flow;
      cost += a.cost;
      auto const expect = Rational( net.scale ) * ( h0 - H( Rational( flow, net.scale ) ) );
      if ( Rational( cost ) != expect )
      {
        std::ostringstream os;
        os << "edge " << k << " (" << to_string( e.cls ) << ") flow " << flow << ": arcs give " << cost << ", H gives " << expect;
        return os.str();
      }
    }
  }
  return {};
}

/*! \brief Random circulation instance with `n` nodes, integer costs in [-cmax, cmax]. */
inline FlowNetwork random_network( std::mt19937_64& rng, int n, int m, std::int64_t cmax, std::int64_t capmax )
{
  FlowNetwork net;
  net.num_nodes = n;
  for ( auto k = 0; k < m; ++k )
  {
    Arc a;
    a.src = static_cast<int>( rng() % static_cast<std::uint64_t>( n ) );
    a.dst = static_cast<int>( rng() % static_cast<std::uint64_t>( n ) );
    a.cost = static_cast<std::int64_t>( rng() % static_cast<std::uint64_t>( 2 * cmax + 1 ) ) - cmax;
    a.upper = static_cast<std::int64_t>( rng() % static_cast<std::uint64_t>( capmax + 1 ) );
    net.arcs.push_back( a );
  }
  return net;
}

} // namespace rsb::test
