#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace rsb;

namespace
{

int count( DualGraph const& g, EdgeClass cls )
{
  return static_cast<int>( std::count_if( g.edges.begin(), g.edges.end(), [&]( auto const& e ) { return e.cls == cls; } ) );
}

std::vector<Arc> arcs_of( FlowNetwork const& net, int k )
{
  std::vector<Arc> out;
  for ( auto const& a : net.arcs )
    if ( a.dual_edge == k )
      out.push_back( a );
  return out;
}

std::vector<PowerSlackCurve> pc4_for( Circuit const& c ) { return std::vector<PowerSlackCurve>( c.num_gates(), cli::default_curve() ); }

} // namespace

TEST( SplitGraph, C3Structure )
{
  auto const c = test::load_circuit( "c3.circ" );
  auto const g = split_graph( c, 40, pc4_for( c ) );
  EXPECT_EQ( g.num_nodes(), 7 );
  EXPECT_EQ( count( g, EdgeClass::E1 ), 3 );
  EXPECT_EQ( count( g, EdgeClass::E2 ), 3 );
  EXPECT_EQ( count( g, EdgeClass::E3 ), 3 );
  EXPECT_EQ( count( g, EdgeClass::E4 ), 6 );
  EXPECT_EQ( g.nff, 2 );
  EXPECT_EQ( g.nff_bar, 80 );
  for ( auto const& e : g.edges )
  {
    switch ( e.cls )
    {
    case EdgeClass::E1:
      EXPECT_EQ( e.lower, c.gate( e.gate ).delay );
      EXPECT_EQ( e.upper, c.gate( e.gate ).delay + 33 );
      break;
    case EdgeClass::E2:
      EXPECT_EQ( e.lower, c.gate( e.gate ).delay - 40 * e.ff );
      EXPECT_EQ( e.upper, c.gate( e.gate ).delay + 33 - 40 * e.ff );
      break;
    case EdgeClass::E3:
      EXPECT_EQ( e.lower, -40 * e.ff );
      EXPECT_EQ( e.upper, 80 );
      break;
    case EdgeClass::E4:
      EXPECT_EQ( e.lower, 0 );
      EXPECT_EQ( e.upper, 80 );
      break;
    }
  }
}

TEST( SplitGraph, SelfLoop )
{
  auto const c = test::load_circuit( "self_loop.circ" );
  auto const g = split_graph( c, 60, pc4_for( c ) );
  for ( auto const& e : g.edges )
  {
    if ( e.cls == EdgeClass::E2 )
    {
      EXPECT_EQ( e.from, g.R_node( 0 ) );
      EXPECT_EQ( e.to, g.R_node( 0 ) );
      EXPECT_EQ( e.lower, 20 - 60 );
    }
    if ( e.cls == EdgeClass::E3 )
    {
      EXPECT_EQ( e.from, g.r_node( 0 ) );
      EXPECT_EQ( e.to, g.r_node( 0 ) );
      EXPECT_EQ( e.lower, -60 );
    }
  }
}

TEST( SplitGraph, PeriodBelowFirstLevel )
{
  auto const c = test::load_circuit( "self_loop.circ" );
  EXPECT_THROW( split_graph( c, 19, pc4_for( c ) ), InputError );
}

TEST( Expand, Pc4ArcsOnZeroDelayGate )
{
  Circuit const c( { { "g", 0 } }, {} );
  auto const net = expand( split_graph( c, 40, pc4_for( c ) ) );
  EXPECT_EQ( net.scale, 130 );
  auto const arcs = arcs_of( net, 0 );
  ASSERT_EQ( arcs.size(), 4u );
  EXPECT_EQ( arcs[0].cost, -33 );
  EXPECT_EQ( arcs[0].upper, 200 );
  EXPECT_EQ( arcs[1].cost, -20 );
  EXPECT_EQ( arcs[1].upper, 190 );
  EXPECT_EQ( arcs[2].cost, -10 );
  EXPECT_EQ( arcs[2].upper, 130 );
  EXPECT_EQ( arcs[3].cost, 0 );
  EXPECT_EQ( arcs[3].upper, 130 * ( net.m_cap - 4 ) );
  EXPECT_EQ( net.m_cap, 5 );
}

TEST( Expand, StructuralArcs )
{
  auto const c = test::load_circuit( "self_loop.circ" );
  auto const g = split_graph( c, 20, pc4_for( c ) );
  auto const net = expand( g );
  for ( auto k = 0; k < static_cast<int>( g.edges.size() ); ++k )
  {
    auto const arcs = arcs_of( net, k );
    ASSERT_FALSE( arcs.empty() );
    if ( g.edges[k].cls == EdgeClass::E3 )
    {
      ASSERT_EQ( arcs.size(), 1u );
      EXPECT_EQ( arcs[0].cost, 20 );
      EXPECT_EQ( arcs[0].upper, net.m_cap * net.scale );
    }
    if ( g.edges[k].cls == EdgeClass::E4 )
    {
      ASSERT_EQ( arcs.size(), 2u );
      EXPECT_EQ( arcs[0].src, g.edges[k].to );
      EXPECT_EQ( arcs[0].dst, g.source() );
      EXPECT_EQ( arcs[0].cost, -g.nff_bar );
      EXPECT_EQ( arcs[1].src, g.source() );
      EXPECT_EQ( arcs[1].cost, 0 );
      EXPECT_EQ( arcs[0].upper, net.m_cap * net.scale );
      EXPECT_EQ( arcs[1].upper, net.m_cap * net.scale );
    }
  }
  for ( auto const& a : net.arcs )
    EXPECT_EQ( a.lower, 0 );
}

TEST( Expand, FiniteArcsReconstructPowerDrop )
{
  for ( auto seed = 1u; seed <= 15; ++seed )
  {
    auto const c = generate_random( { 6, 1.8, 0.3, 1, 9, seed } );
    auto const lib = test::load_curves( "curves4.json" );
    auto const pool = test::all_curves( lib );
    std::vector<PowerSlackCurve> curves;
    for ( auto i = 0; i < c.num_gates(); ++i )
      curves.push_back( pool[( i + seed ) % pool.size()] );
    auto const g = split_graph( c, 100, curves );
    auto const net = expand( g );
    EXPECT_EQ( expand( g ), net );
    for ( auto k = 0; k < static_cast<int>( g.edges.size() ); ++k )
    {
      auto const& e = g.edges[k];
      if ( e.cls != EdgeClass::E1 && e.cls != EdgeClass::E2 )
        continue;
      auto const pts = g.cost_points( e );
      auto arcs = arcs_of( net, k );
      /* arcs run from the last level down; cumulative capacity times cost step is b(q) times the slack gap */
      auto const expect = pts.front().second - pts.back().second;
      Rational via_arcs = 0;
      Rational cum = 0;
      for ( auto q = 0u; q + 1 < arcs.size(); ++q )
      {
        cum += Rational( arcs[q].upper, net.scale );
        via_arcs += cum * Rational( arcs[q + 1].cost - arcs[q].cost );
      }
      EXPECT_EQ( via_arcs, expect ) << "edge " << k;
    }
  }
}

TEST( Expand, HReconstructionOnFixtureCurves )
{
  for ( auto const& curve : test::all_curves( test::load_curves( "curves4.json" ) ) )
  {
    Circuit const c( { { "a", 2 }, { "b", 1 }, { "j", 3 } }, { { 0, 2, 0 }, { 1, 2, 0 } } );
    auto const g = split_graph( c, 60, std::vector<PowerSlackCurve>( 3, curve ) );
    auto const net = expand( g );
    for ( auto k = 0; k < static_cast<int>( g.edges.size() ); ++k )
      if ( g.edges[k].cls == EdgeClass::E1 || g.edges[k].cls == EdgeClass::E2 )
        EXPECT_EQ( test::check_h_reconstruction( g, net, k ), "" );
  }
}

TEST( Dimacs, RoundTrip )
{
  auto const c = test::load_circuit( "c3.circ" );
  auto const net = expand( split_graph( c, 5, pc4_for( c ) ) );
  auto const text = to_dimacs( net );
  EXPECT_NE( text.find( "p min 7 " ), std::string::npos );
  std::istringstream in( text );
  auto const back = read_dimacs( in );
  ASSERT_EQ( back.num_nodes, net.num_nodes );
  ASSERT_EQ( back.arcs.size(), net.arcs.size() );
  for ( auto k = 0u; k < net.arcs.size(); ++k )
  {
    EXPECT_EQ( back.arcs[k].src, net.arcs[k].src );
    EXPECT_EQ( back.arcs[k].dst, net.arcs[k].dst );
    EXPECT_EQ( back.arcs[k].cost, net.arcs[k].cost );
    EXPECT_EQ( back.arcs[k].upper, net.arcs[k].upper );
  }
  EXPECT_EQ( solve_mcf( back ).cost, solve_mcf( net ).cost );
}

TEST( Dimacs, Errors )
{
  auto read = []( std::string const& s ) {
    std::istringstream in( s );
    return read_dimacs( in );
  };
  EXPECT_THROW( read( "a 1 2 0 1 1\n" ), InputError );
  EXPECT_THROW( read( "p min 2 1\nn 1 5\n" ), InputError );
  EXPECT_THROW( read( "p min 2 1\na 1 3 0 1 1\n" ), InputError );
  EXPECT_THROW( read( "p max 2 1\n" ), InputError );
  EXPECT_NO_THROW( read( "c hi\np min 2 1\nn 1 0\na 1 2 0 4 -3\n" ) );
}
