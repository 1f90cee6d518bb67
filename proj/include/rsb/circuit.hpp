#pragma once

/*!
  \file circuit.hpp
  \brief Sequential circuit graph, text format, and static timing analysis.

  A circuit is a directed multigraph G(V, E, d, w): every vertex is a
  combinational gate with an integer delay, every edge carries an integer
  number of flip-flops. Edges with w > 0 cut timing propagation.
*/

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rsb
{

using Time = std::int64_t;

/*! \brief Raised for malformed or invalid user input (files, curves, flags). */
class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct Gate
{
  std::string name;
  Time delay{ 0 };

  bool operator==( Gate const& ) const = default;
};

struct Edge
{
  int src{ 0 };
  int dst{ 0 };
  std::int64_t ff{ 0 };

  bool operator==( Edge const& ) const = default;
};

/*! \brief Immutable, validated circuit graph.
 *
 * Invariants checked on construction: at least one gate, nonnegative
 * delays and FF counts, valid endpoints, and no cycle made only of
 * zero-FF edges.
 */
class Circuit
{
public:
  Circuit( std::vector<Gate> gates, std::vector<Edge> edges )
      : gates_( std::move( gates ) ), edges_( std::move( edges ) )
  {
    validate();
    fanin_.resize( gates_.size() );
    fanout_.resize( gates_.size() );
    for ( auto e = 0u; e < edges_.size(); ++e )
    {
      fanout_[edges_[e].src].push_back( static_cast<int>( e ) );
      fanin_[edges_[e].dst].push_back( static_cast<int>( e ) );
    }
    if ( !zero_ff_topological_order( ff_counts() ) )
    {
      throw InputError( "combinational cycle (cycle of zero-FF edges)" );
    }
  }

  int num_gates() const { return static_cast<int>( gates_.size() ); }
  int num_edges() const { return static_cast<int>( edges_.size() ); }

  std::vector<Gate> const& gates() const { return gates_; }
  std::vector<Edge> const& edges() const { return edges_; }
  Gate const& gate( int i ) const { return gates_.at( i ); }
  Edge const& edge( int e ) const { return edges_.at( e ); }

  /*! \brief Edge indices entering / leaving gate `i`. */
  std::vector<int> const& fanin( int i ) const { return fanin_.at( i ); }
  std::vector<int> const& fanout( int i ) const { return fanout_.at( i ); }

  /*! \brief Gates without fanin edges are primary inputs; without fanout, primary outputs. */
  bool is_pi( int i ) const { return fanin_.at( i ).empty(); }
  bool is_po( int i ) const { return fanout_.at( i ).empty(); }

  std::vector<int> primary_inputs() const { return select( [this]( int i ) { return is_pi( i ); } ); }
  std::vector<int> primary_outputs() const { return select( [this]( int i ) { return is_po( i ); } ); }

  std::vector<Time> delays() const
  {
    std::vector<Time> d;
    d.reserve( gates_.size() );
    for ( auto const& g : gates_ )
      d.push_back( g.delay );
    return d;
  }

  std::optional<int> find_gate( std::string const& name ) const
  {
    for ( auto i = 0u; i < gates_.size(); ++i )
      if ( gates_[i].name == name )
        return static_cast<int>( i );
    return std::nullopt;
  }

  std::int64_t total_ffs() const
  {
    return std::accumulate( edges_.begin(), edges_.end(), std::int64_t{ 0 },
                            []( std::int64_t acc, Edge const& e ) { return acc + e.ff; } );
  }

  /*! \brief Topological order of the subgraph of edges whose FF count
   *  (given per edge in `weights`) is zero; nullopt if that subgraph is cyclic.
   */
  std::optional<std::vector<int>> zero_ff_topological_order( std::vector<std::int64_t> const& weights ) const
  {
    std::vector<int> indeg( gates_.size(), 0 );
    for ( auto e = 0u; e < edges_.size(); ++e )
      if ( weights[e] == 0 )
        ++indeg[edges_[e].dst];

    std::vector<int> order;
    order.reserve( gates_.size() );
    for ( auto i = 0u; i < gates_.size(); ++i )
      if ( indeg[i] == 0 )
        order.push_back( static_cast<int>( i ) );

    for ( auto head = 0u; head < order.size(); ++head )
    {
      for ( auto e : fanout_[order[head]] )
      {
        if ( weights[e] == 0 && --indeg[edges_[e].dst] == 0 )
          order.push_back( edges_[e].dst );
      }
    }
    if ( order.size() != gates_.size() )
      return std::nullopt;
    return order;
  }

  /*! \brief FF counts as a vector indexed by edge. */
  std::vector<std::int64_t> ff_counts() const
  {
    std::vector<std::int64_t> w;
    w.reserve( edges_.size() );
    for ( auto const& e : edges_ )
      w.push_back( e.ff );
    return w;
  }

  bool operator==( Circuit const& other ) const
  {
    return gates_ == other.gates_ && edges_ == other.edges_;
  }

private:
  template<class Pred>
  std::vector<int> select( Pred&& pred ) const
  {
    std::vector<int> ids;
    for ( auto i = 0; i < num_gates(); ++i )
      if ( pred( i ) )
        ids.push_back( i );
    return ids;
  }

  void validate() const
  {
    if ( gates_.empty() )
      throw InputError( "no gates" );
    for ( auto const& g : gates_ )
      if ( g.delay < 0 )
        throw InputError( "negative delay on gate " + g.name );
    for ( auto const& e : edges_ )
    {
      if ( e.src < 0 || e.dst < 0 || e.src >= num_gates() || e.dst >= num_gates() )
        throw InputError( "dangling edge endpoint" );
      if ( e.ff < 0 )
        throw InputError( "negative FF count on edge " + gates_[e.src].name + " -> " + gates_[e.dst].name );
    }
  }

  std::vector<Gate> gates_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> fanin_;
  std::vector<std::vector<int>> fanout_;
};

/*! \brief Same gates and delays with a different FF count per edge. */
inline Circuit with_ff_counts( Circuit const& c, std::vector<std::int64_t> const& w )
{
  auto edges = c.edges();
  for ( auto e = 0u; e < edges.size(); ++e )
    edges[e].ff = w.at( e );
  return Circuit( c.gates(), std::move( edges ) );
}

/* text format */

/*! \brief Parses `gate <name> <delay>` / `edge <src> <dst> <ff>` lines; `#` starts a comment. */
inline Circuit parse_circuit( std::string const& text )
{
  static const std::regex name_re( "[A-Za-z0-9_.]+" );

  std::vector<Gate> gates;
  std::unordered_map<std::string, int> index;
  struct PendingEdge
  {
    std::string src, dst;
    std::int64_t ff;
    int line;
  };
  std::vector<PendingEdge> pending;

  auto fail = [&]( int line, std::string const& msg ) {
    throw InputError( "line " + std::to_string( line ) + ": " + msg );
  };
  auto parse_int = [&]( std::string const& tok, int line ) {
    std::int64_t value{};
    std::size_t pos{};
    try
    {
      value = std::stoll( tok, &pos );
    }
    catch ( std::exception const& )
    {
      fail( line, "expected integer, got '" + tok + "'" );
    }
    if ( pos != tok.size() )
      fail( line, "expected integer, got '" + tok + "'" );
    return value;
  };

  std::istringstream in( text );
  std::string raw;
  int lineno = 0;
  while ( std::getline( in, raw ) )
  {
    ++lineno;
    if ( auto hash = raw.find( '#' ); hash != std::string::npos )
      raw.erase( hash );
    std::istringstream ls( raw );
    std::vector<std::string> tok;
    for ( std::string t; ls >> t; )
      tok.push_back( t );
    if ( tok.empty() )
      continue;

    if ( tok[0] == "gate" )
    {
      if ( tok.size() != 3 )
        fail( lineno, "expected 'gate <name> <delay>'" );
      if ( !std::regex_match( tok[1], name_re ) )
        fail( lineno, "invalid gate name '" + tok[1] + "'" );
      if ( index.contains( tok[1] ) )
        fail( lineno, "duplicate gate '" + tok[1] + "'" );
      auto delay = parse_int( tok[2], lineno );
      if ( delay < 0 )
        fail( lineno, "negative delay" );
      index.emplace( tok[1], static_cast<int>( gates.size() ) );
      gates.push_back( { tok[1], delay } );
    }
    else if ( tok[0] == "edge" )
    {
      if ( tok.size() != 4 )
        fail( lineno, "expected 'edge <src> <dst> <ff_count>'" );
      auto ff = parse_int( tok[3], lineno );
      if ( ff < 0 )
        fail( lineno, "negative FF count" );
      pending.push_back( { tok[1], tok[2], ff, lineno } );
    }
    else
    {
      fail( lineno, "unknown record '" + tok[0] + "'" );
    }
  }

  std::vector<Edge> edges;
  edges.reserve( pending.size() );
  for ( auto const& p : pending )
  {
    auto s = index.find( p.src );
    auto d = index.find( p.dst );
    if ( s == index.end() || d == index.end() )
      fail( p.line, "dangling edge endpoint '" + ( s == index.end() ? p.src : p.dst ) + "'" );
    edges.push_back( { s->second, d->second, p.ff } );
  }
  return Circuit( std::move( gates ), std::move( edges ) );
}

inline std::string render_circuit( Circuit const& c )
{
  std::ostringstream os;
  for ( auto const& g : c.gates() )
    os << "gate " << g.name << ' ' << g.delay << '\n';
  for ( auto const& e : c.edges() )
    os << "edge " << c.gate( e.src ).name << ' ' << c.gate( e.dst ).name << ' ' << e.ff << '\n';
  return os.str();
}

/* static timing analysis */

struct TimingReport
{
  Time period{ 0 };
  std::vector<Time> arrival;
  std::vector<Time> required;
  std::vector<Time> slack;

  Time max_arrival() const { return arrival.empty() ? 0 : *std::max_element( arrival.begin(), arrival.end() ); }
  Time worst_slack() const { return slack.empty() ? 0 : *std::min_element( slack.begin(), slack.end() ); }
};

/*! \brief Arrival, required time and slack of every gate at period `period`.
 *
 * `eff` holds the effective delay of each gate (its delay plus any
 * budgeted slack). Arrival is the latest zero-FF-path delay ending at the
 * gate, including its own effective delay. Required time is `period` at
 * gates whose fanouts are all registered, otherwise the minimum of
 * (required - effective delay) over zero-FF fanouts.
 */
inline TimingReport sta( Circuit const& c, Time period, std::vector<Time> const& eff )
{
  auto const n = c.num_gates();
  auto order = c.zero_ff_topological_order( c.ff_counts() );

  TimingReport rep;
  rep.period = period;
  rep.arrival.assign( n, 0 );
  rep.required.assign( n, period );
  rep.slack.assign( n, 0 );

  for ( auto i : *order )
  {
    Time a = 0;
    for ( auto e : c.fanin( i ) )
      if ( c.edge( e ).ff == 0 )
        a = std::max( a, rep.arrival[c.edge( e ).src] );
    rep.arrival[i] = a + eff[i];
  }
  for ( auto it = order->rbegin(); it != order->rend(); ++it )
  {
    auto i = *it;
    Time r = period;
    for ( auto e : c.fanout( i ) )
      if ( c.edge( e ).ff == 0 )
        r = std::min( r, rep.required[c.edge( e ).dst] - eff[c.edge( e ).dst] );
    rep.required[i] = r;
  }
  for ( auto i = 0; i < n; ++i )
    rep.slack[i] = rep.required[i] - rep.arrival[i];
  return rep;
}

inline bool period_feasible( Circuit const& c, Time period, std::vector<Time> const& eff )
{
  return sta( c, period, eff ).max_arrival() <= period;
}

/* random instances */

struct GeneratorParams
{
  int num_gates{ 10 };
  double edge_density{ 2.0 };  ///< edges per gate
  double ff_prob{ 0.3 };
  Time min_delay{ 1 };
  Time max_delay{ 10 };
  std::uint64_t seed{ 1 };
};

/*! \brief Deterministic random circuit; an edge that would close a zero-FF
 *  cycle gets one FF so the result always validates.
 */
inline Circuit generate_random( GeneratorParams const& p )
{
  if ( p.num_gates < 1 )
    throw std::invalid_argument( "generate_random: num_gates must be >= 1" );
  if ( p.ff_prob < 0.0 || p.ff_prob > 1.0 || p.edge_density < 0.0 || p.min_delay < 0 || p.min_delay > p.max_delay )
    throw std::invalid_argument( "generate_random: parameter out of range" );

  std::mt19937_64 rng( p.seed );
  auto uniform = [&]( std::int64_t lo, std::int64_t hi ) {
    return lo + static_cast<std::int64_t>( rng() % static_cast<std::uint64_t>( hi - lo + 1 ) );
  };
  auto bernoulli = [&]( double prob ) {
    return static_cast<double>( rng() >> 11 ) * 0x1.0p-53 < prob;
  };

  auto const n = p.num_gates;
  std::vector<Gate> gates;
  for ( auto i = 0; i < n; ++i )
    gates.push_back( { "g" + std::to_string( i ), uniform( p.min_delay, p.max_delay ) } );

  auto const m = n == 1 ? 0 : static_cast<int>( p.edge_density * n + 0.5 );
  std::vector<Edge> edges;
  std::vector<std::vector<int>> zero_succ( n );

  auto reaches = [&]( int from, int to ) {
    std::vector<char> seen( n, 0 );
    std::vector<int> stack{ from };
    seen[from] = 1;
    while ( !stack.empty() )
    {
      auto v = stack.back();
      stack.pop_back();
      if ( v == to )
        return true;
      for ( auto s : zero_succ[v] )
        if ( !seen[s] )
        {
          seen[s] = 1;
          stack.push_back( s );
        }
    }
    return false;
  };

  for ( auto k = 0; k < m; ++k )
  {
    auto src = static_cast<int>( uniform( 0, n - 1 ) );
    auto dst = static_cast<int>( uniform( 0, n - 2 ) );
    if ( dst >= src )
      ++dst;
    std::int64_t ff = bernoulli( p.ff_prob ) ? 1 : 0;
    if ( ff == 0 && reaches( dst, src ) )
      ff = 1;
    if ( ff == 0 )
      zero_succ[src].push_back( dst );
    edges.push_back( { src, dst, ff } );
  }
  return Circuit( std::move( gates ), std::move( edges ) );
}

} // namespace rsb
