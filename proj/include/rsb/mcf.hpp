#pragma once

/*!
  \file mcf.hpp
  \brief Exact integer min-cost circulation.

  `solve_mcf` is Goldberg-Tarjan cost scaling (push/relabel on admissible
  arcs, epsilon halved each phase). Costs are multiplied by n + 1 so that
  1-optimality in scaled units is exact optimality. `ssp_oracle` is an
  independent successive-shortest-path solver used for cross-checking.
*/

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "flow_transform.hpp"

namespace rsb
{

struct SolverStats
{
  std::int64_t phases{ 0 };
  std::int64_t pushes{ 0 };
  std::int64_t relabels{ 0 };
  double wall_ms{ 0.0 };
};

struct FlowSolution
{
  std::vector<std::int64_t> flow; ///< per arc
  std::int64_t cost{ 0 };
  SolverStats stats;
};

struct Potentials
{
  std::vector<std::int64_t> dist;
};

namespace detail
{

/* residual graph in CSR form: residual edge 2k is arc k forward, 2k + 1 its reverse */
struct Residual
{
  int n{ 0 };
  std::vector<int> offset;
  std::vector<int> edges; ///< residual edge ids grouped by tail node

  explicit Residual( FlowNetwork const& net ) : n( net.num_nodes )
  {
    offset.assign( n + 1, 0 );
    for ( auto const& a : net.arcs )
    {
      ++offset[a.src + 1];
      ++offset[a.dst + 1];
    }
    for ( auto v = 0; v < n; ++v )
      offset[v + 1] += offset[v];
    edges.resize( offset[n] );
    auto fill = offset;
    for ( auto k = 0u; k < net.arcs.size(); ++k )
    {
      edges[fill[net.arcs[k].src]++] = static_cast<int>( 2 * k );
      edges[fill[net.arcs[k].dst]++] = static_cast<int>( 2 * k + 1 );
    }
  }
};

inline int head( FlowNetwork const& net, int re ) { return re & 1 ? net.arcs[re >> 1].src : net.arcs[re >> 1].dst; }
inline int tail( FlowNetwork const& net, int re ) { return re & 1 ? net.arcs[re >> 1].dst : net.arcs[re >> 1].src; }
inline std::int64_t rcost( FlowNetwork const& net, int re ) { return re & 1 ? -net.arcs[re >> 1].cost : net.arcs[re >> 1].cost; }
inline std::int64_t rcap( FlowNetwork const& net, std::vector<std::int64_t> const& x, int re )
{
  return re & 1 ? x[re >> 1] : net.arcs[re >> 1].upper - x[re >> 1];
}

inline void check_circulation_instance( FlowNetwork const& net )
{
  for ( auto const& a : net.arcs )
  {
    if ( a.lower != 0 )
      throw std::invalid_argument( "mcf: nonzero lower bound; rewrite to a circulation with zero lower bounds first" );
    if ( a.upper < 0 )
      throw std::invalid_argument( "mcf: negative capacity" );
    std::int64_t prod{};
    if ( __builtin_mul_overflow( a.cost < 0 ? -a.cost : a.cost, a.upper, &prod ) )
      throw std::overflow_error( "mcf: cost x capacity exceeds 63 bits" );
  }
}

inline std::int64_t total_cost( FlowNetwork const& net, std::vector<std::int64_t> const& x )
{
  __int128 sum = 0;
  for ( auto k = 0u; k < net.arcs.size(); ++k )
    sum += static_cast<__int128>( x[k] ) * net.arcs[k].cost;
  if ( sum > std::numeric_limits<std::int64_t>::max() || sum < std::numeric_limits<std::int64_t>::min() )
    throw std::overflow_error( "mcf: total cost exceeds 63 bits" );
  return static_cast<std::int64_t>( sum );
}

} // namespace detail

/*! \brief Optimal integral circulation by cost scaling. */
inline FlowSolution solve_mcf( FlowNetwork const& net )
{
  auto const t0 = std::chrono::steady_clock::now();
  detail::check_circulation_instance( net );

  auto const n = net.num_nodes;
  detail::Residual res( net );
  FlowSolution sol;
  sol.flow.assign( net.arcs.size(), 0 );
  auto& x = sol.flow;

  std::int64_t const alpha = n + 1;
  std::vector<std::int64_t> cost( net.arcs.size() );
  std::int64_t eps = 0;
  for ( auto k = 0u; k < net.arcs.size(); ++k )
  {
    if ( __builtin_mul_overflow( net.arcs[k].cost, alpha, &cost[k] ) )
      throw std::overflow_error( "mcf: scaled cost exceeds 63 bits" );
    eps = std::max( eps, cost[k] < 0 ? -cost[k] : cost[k] );
  }
  auto scost = [&]( int re ) { return re & 1 ? -cost[re >> 1] : cost[re >> 1]; };

  std::vector<std::int64_t> price( n, 0 );
  std::vector<std::int64_t> excess( n, 0 );
  std::vector<int> current( n );
  std::vector<char> queued( n, 0 );
  std::deque<int> active;

  auto push = [&]( int re, std::int64_t amount ) {
    auto const k = re >> 1;
    x[k] += re & 1 ? -amount : amount;
    auto const u = detail::tail( net, re );
    auto const v = detail::head( net, re );
    excess[u] -= amount;
    excess[v] += amount;
    if ( excess[v] > 0 && !queued[v] )
    {
      queued[v] = 1;
      active.push_back( v );
    }
    ++sol.stats.pushes;
  };

  while ( eps > 1 )
  {
    eps = std::max<std::int64_t>( 1, eps / 2 );
    ++sol.stats.phases;

    /* saturate every residual edge with negative reduced cost */
    for ( auto u = 0; u < n; ++u )
    {
      for ( auto i = res.offset[u]; i < res.offset[u + 1]; ++i )
      {
        auto const re = res.edges[i];
        auto const v = detail::head( net, re );
        auto const cap = detail::rcap( net, x, re );
        if ( cap > 0 && scost( re ) + price[u] - price[v] < 0 )
          push( re, cap );
      }
    }
    for ( auto u = 0; u < n; ++u )
      current[u] = res.offset[u];

    while ( !active.empty() )
    {
      auto const u = active.front();
      active.pop_front();
      queued[u] = 0;
      while ( excess[u] > 0 )
      {
        if ( current[u] == res.offset[u + 1] )
        {
          /* relabel */
          auto best = std::numeric_limits<std::int64_t>::min();
          for ( auto i = res.offset[u]; i < res.offset[u + 1]; ++i )
          {
            auto const re = res.edges[i];
            if ( detail::rcap( net, x, re ) > 0 )
              best = std::max( best, price[detail::head( net, re )] - scost( re ) );
          }
          if ( best == std::numeric_limits<std::int64_t>::min() )
            throw std::logic_error( "mcf: active node without residual arcs" );
          price[u] = best - eps;
          current[u] = res.offset[u];
          ++sol.stats.relabels;
          continue;
        }
        auto const re = res.edges[current[u]];
        auto const v = detail::head( net, re );
        auto const cap = detail::rcap( net, x, re );
        if ( cap > 0 && scost( re ) + price[u] - price[v] < 0 )
          push( re, std::min( cap, excess[u] ) );
        else
          ++current[u];
      }
    }
  }

  sol.cost = detail::total_cost( net, x );
  sol.stats.wall_ms = std::chrono::duration<double, std::milli>( std::chrono::steady_clock::now() - t0 ).count();
  return sol;
}

/*! \brief Independent solver: saturate negative arcs, then route excess to deficit
 *  along shortest augmenting paths (Dijkstra on reduced costs, node potentials).
 */
inline FlowSolution ssp_oracle( FlowNetwork const& net )
{
  auto const t0 = std::chrono::steady_clock::now();
  detail::check_circulation_instance( net );

  auto const n = net.num_nodes;
  detail::Residual res( net );
  FlowSolution sol;
  sol.flow.assign( net.arcs.size(), 0 );
  auto& x = sol.flow;

  std::vector<std::int64_t> excess( n, 0 );
  for ( auto k = 0u; k < net.arcs.size(); ++k )
  {
    auto const& a = net.arcs[k];
    if ( a.cost < 0 )
    {
      x[k] = a.upper;
      excess[a.src] -= a.upper;
      excess[a.dst] += a.upper;
    }
  }

  std::vector<std::int64_t> pi( n, 0 );
  constexpr auto inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> dist( n );
  std::vector<int> pred( n );
  std::vector<int> root( n );

  while ( true )
  {
    bool any = false;
    using Item = std::pair<std::int64_t, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::fill( dist.begin(), dist.end(), inf );
    std::fill( pred.begin(), pred.end(), -1 );
    for ( auto v = 0; v < n; ++v )
    {
      if ( excess[v] > 0 )
      {
        any = true;
        dist[v] = 0;
        root[v] = v;
        pq.emplace( 0, v );
      }
    }
    if ( !any )
      break;

    int target = -1;
    while ( !pq.empty() )
    {
      auto [du, u] = pq.top();
      pq.pop();
      if ( du != dist[u] )
        continue;
      if ( excess[u] < 0 )
      {
        target = u;
        break;
      }
      for ( auto i = res.offset[u]; i < res.offset[u + 1]; ++i )
      {
        auto const re = res.edges[i];
        if ( detail::rcap( net, x, re ) <= 0 )
          continue;
        auto const v = detail::head( net, re );
        auto const rc = detail::rcost( net, re ) + pi[u] - pi[v];
        if ( rc < 0 )
          throw std::logic_error( "ssp_oracle: negative reduced cost" );
        if ( du + rc < dist[v] )
        {
          dist[v] = du + rc;
          pred[v] = re;
          root[v] = root[u];
          pq.emplace( dist[v], v );
        }
      }
    }
    if ( target < 0 )
      throw std::logic_error( "ssp_oracle: excess cannot reach any deficit" );

    auto const dt = dist[target];
    for ( auto v = 0; v < n; ++v )
      pi[v] += std::min( dist[v], dt );

    auto amount = std::min( excess[root[target]], -excess[target] );
    for ( auto v = target; pred[v] >= 0; v = detail::tail( net, pred[v] ) )
      amount = std::min( amount, detail::rcap( net, x, pred[v] ) );
    for ( auto v = target; pred[v] >= 0; v = detail::tail( net, pred[v] ) )
    {
      auto const re = pred[v];
      x[re >> 1] += re & 1 ? -amount : amount;
    }
    excess[root[target]] -= amount;
    excess[target] += amount;
    ++sol.stats.pushes;
  }

  sol.cost = detail::total_cost( net, x );
  sol.stats.wall_ms = std::chrono::duration<double, std::milli>( std::chrono::steady_clock::now() - t0 ).count();
  return sol;
}

/*! \brief Empty string if `sol` respects bounds and conservation, otherwise a diagnostic. */
inline std::string check_feasible( FlowNetwork const& net, FlowSolution const& sol )
{
  if ( sol.flow.size() != net.arcs.size() )
    return "flow vector size mismatch";
  std::vector<std::int64_t> balance( net.num_nodes, 0 );
  for ( auto k = 0u; k < net.arcs.size(); ++k )
  {
    auto const& a = net.arcs[k];
    if ( sol.flow[k] < a.lower || sol.flow[k] > a.upper )
      return "arc " + std::to_string( k ) + " flow out of bounds";
    balance[a.src] -= sol.flow[k];
    balance[a.dst] += sol.flow[k];
  }
  for ( auto v = 0; v < net.num_nodes; ++v )
    if ( balance[v] != 0 )
      return "conservation violated at node " + std::to_string( v );
  return {};
}

/*! \brief True if the residual network of `sol` contains a negative-cost cycle. */
inline bool has_negative_residual_cycle( FlowNetwork const& net, FlowSolution const& sol )
{
  auto const n = net.num_nodes;
  std::vector<std::int64_t> d( n, 0 );
  for ( auto round = 0; round <= n; ++round )
  {
    bool changed = false;
    for ( auto re = 0; re < static_cast<int>( 2 * net.arcs.size() ); ++re )
    {
      if ( detail::rcap( net, sol.flow, re ) <= 0 )
        continue;
      auto const u = detail::tail( net, re );
      auto const v = detail::head( net, re );
      if ( d[u] + detail::rcost( net, re ) < d[v] )
      {
        d[v] = d[u] + detail::rcost( net, re );
        changed = true;
      }
    }
    if ( !changed )
      return false;
  }
  return true;
}

/*! \brief Shortest residual distances from `source` (label-correcting).
 *
 * Nodes not reachable from `source` get `sentinel`. Throws if a negative
 * residual cycle is reachable, which means `sol` was not optimal.
 */
inline Potentials residual_potentials( FlowNetwork const& net, FlowSolution const& sol, int source, std::int64_t sentinel )
{
  auto const n = net.num_nodes;
  detail::Residual res( net );
  constexpr auto inf = std::numeric_limits<std::int64_t>::max();
  std::vector<std::int64_t> d( n, inf );
  std::vector<int> hops( n, 0 );
  std::vector<char> inq( n, 0 );
  std::deque<int> queue{ source };
  d[source] = 0;
  inq[source] = 1;
  while ( !queue.empty() )
  {
    auto const u = queue.front();
    queue.pop_front();
    inq[u] = 0;
    for ( auto i = res.offset[u]; i < res.offset[u + 1]; ++i )
    {
      auto const re = res.edges[i];
      if ( detail::rcap( net, sol.flow, re ) <= 0 )
        continue;
      auto const v = detail::head( net, re );
      auto const nd = d[u] + detail::rcost( net, re );
      if ( nd < d[v] )
      {
        d[v] = nd;
        hops[v] = hops[u] + 1;
        if ( hops[v] >= n )
          throw std::logic_error( "residual_potentials: negative residual cycle (flow not optimal)" );
        if ( !inq[v] )
        {
          inq[v] = 1;
          queue.push_back( v );
        }
      }
    }
  }
  for ( auto& v : d )
    if ( v == inf )
      v = sentinel;
  return { std::move( d ) };
}

inline Potentials residual_potentials( FlowNetwork const& net, FlowSolution const& sol, int source )
{
  return residual_potentials( net, sol, source, net.nff_bar );
}

} // namespace rsb
