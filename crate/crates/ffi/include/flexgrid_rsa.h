#ifndef FLEXGRID_RSA_H
#define FLEXGRID_RSA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrsaStatus {
  FRSA_STATUS_OK = 0,
  /**
   * The request could not be served; no assignment was produced.
   */
  FRSA_STATUS_BLOCKED = 1,
  FRSA_STATUS_NULL_POINTER = 2,
  FRSA_STATUS_INVALID_ARGUMENT = 3,
  /**
   * The topology text could not be parsed or validated.
   */
  FRSA_STATUS_PARSE = 4,
  FRSA_STATUS_IO = 5,
  /**
   * A spectrum operation conflicted with the network state.
   */
  FRSA_STATUS_SPECTRUM = 6,
  /**
   * A simulation failed or detected a broken invariant.
   */
  FRSA_STATUS_SIMULATION = 7,
  /**
   * The output buffer is too small; the required size was reported.
   */
  FRSA_STATUS_BUFFER_TOO_SMALL = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  FRSA_STATUS_PANIC = 9,
} FrsaStatus;

typedef enum FrsaPolicy {
  FRSA_POLICY_SP_KM = 0,
  FRSA_POLICY_SP_HOPS = 1,
  FRSA_POLICY_KSP_KM = 2,
  FRSA_POLICY_TYPE1 = 3,
  FRSA_POLICY_TYPE2 = 4,
  FRSA_POLICY_TYPE3 = 5,
} FrsaPolicy;

/**
 * A routing decision that can be committed to or released from a network.
 */
typedef struct FrsaAssignment FrsaAssignment;

/**
 * A loaded network with its current spectrum state.
 */
typedef struct FrsaNetwork FrsaNetwork;

/**
 * Parameters of one simulated replica. Obtain defaults from
 * [`frsa_sim_config_default`] and override fields as needed.
 */
typedef struct FrsaSimConfig {
  /**
   * One of the `FrsaPolicy` values.
   */
  uint32_t policy;
  size_t k;
  double grid_ghz;
  double guard_band_ghz;
  uint32_t bits_per_symbol;
  double demand_max_gbps;
  /**
   * Draw demands uniformly from [1, B] instead of whole slots.
   */
  bool continuous_demand;
  double load_per_node;
  double mean_holding_time;
  size_t total_requests;
  uint64_t seed;
  double warmup_multiplier;
  size_t frontier_cap;
  bool check_invariants;
} FrsaSimConfig;

typedef struct FrsaMetrics {
  size_t arrived;
  size_t blocked;
  double blocking_probability;
  double bandwidth_blocking_probability;
  double spectrum_utilization;
  size_t post_routing_blocks;
  size_t frontier_cap_hits;
} FrsaMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *frsa_last_error_message(void);

/**
 * Static, human-readable name of a status code.
 */
const char *frsa_status_name(uint32_t status);

/**
 * Loads a topology file. On success `*out` owns a new network.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FrsaStatus frsa_network_load(const char *path, double grid_ghz, struct FrsaNetwork **out);

/**
 * Parses topology text. On success `*out` owns a new network.
 *
 * # Safety
 * `topology` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FrsaStatus frsa_network_from_str(const char *topology,
                                      double grid_ghz,
                                      struct FrsaNetwork **out);

/**
 * Releases a network. Null is ignored.
 *
 * # Safety
 * `net` must come from this library and not be used afterwards.
 */
void frsa_network_free(struct FrsaNetwork *net);

/**
 * Independent copy of a network including its spectrum state.
 *
 * # Safety
 * `net` must be a live network and `out` a valid pointer.
 */
enum FrsaStatus frsa_network_clone(const struct FrsaNetwork *net, struct FrsaNetwork **out);

/**
 * Number of nodes, edges and slots per bitmap. Any output may be null.
 *
 * # Safety
 * `net` must be a live network.
 */
enum FrsaStatus frsa_network_dimensions(const struct FrsaNetwork *net,
                                        size_t *nodes,
                                        size_t *edges,
                                        size_t *slots);

/**
 * Endpoints and length of edge `edge`.
 *
 * # Safety
 * `net` must be a live network; outputs may be null.
 */
enum FrsaStatus frsa_network_edge(const struct FrsaNetwork *net,
                                  size_t edge,
                                  size_t *u,
                                  size_t *v,
                                  double *length_km);

/**
 * Writes the bitmap of `edge` as a NUL-terminated string of `0` and `1`,
 * slot 0 first. `*needed` receives the buffer size required including
 * the terminator; if `capacity` is smaller, nothing is written and
 * `FRSA_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `net` must be a live network, `buf` must hold `capacity` bytes (or be
 * null with `capacity` 0) and `needed` may be null.
 */
enum FrsaStatus frsa_network_edge_bitmap(const struct FrsaNetwork *net,
                                         size_t edge,
                                         char *buf,
                                         size_t capacity,
                                         size_t *needed);

/**
 * Slots needed for `gbps` at the given grid, modulation and guard band.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FrsaStatus frsa_required_slots(double gbps,
                                    double grid_ghz,
                                    uint32_t bits_per_symbol,
                                    double guard_band_ghz,
                                    size_t *out);

/**
 * Routes a request of `required_slots` from `s` to `d` with `policy`, one
 * of the `FrsaPolicy` values. Returns
 * `FRSA_STATUS_OK` with `*out` owning the assignment, or
 * `FRSA_STATUS_BLOCKED` with `*out` set to null. The network is not
 * modified; call [`frsa_commit`] to occupy the slots.
 *
 * # Safety
 * `net` must be a live network and `out` a valid pointer.
 */
enum FrsaStatus frsa_route(const struct FrsaNetwork *net,
                           uint32_t policy,
                           size_t s,
                           size_t d,
                           size_t required_slots,
                           size_t k,
                           struct FrsaAssignment **out);

/**
 * Releases an assignment handle. Null is ignored.
 *
 * # Safety
 * `a` must come from this library and not be used afterwards.
 */
void frsa_assignment_free(struct FrsaAssignment *a);

/**
 * First slot and slot count of an assignment.
 *
 * # Safety
 * `a` must be a live assignment; outputs may be null.
 */
enum FrsaStatus frsa_assignment_range(const struct FrsaAssignment *a,
                                      size_t *start,
                                      size_t *length);

/**
 * Copies the node sequence of an assignment into `nodes`. `*count`
 * receives the number of nodes; if `capacity` is smaller, nothing is
 * copied and `FRSA_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `a` must be a live assignment, `nodes` must hold `capacity` entries
 * (or be null with `capacity` 0) and `count` must be valid.
 */
enum FrsaStatus frsa_assignment_path(const struct FrsaAssignment *a,
                                     size_t *nodes,
                                     size_t capacity,
                                     size_t *count);

/**
 * Occupies the assignment's slots on every edge of its path, or on none.
 *
 * # Safety
 * `net` and `a` must be live handles.
 */
enum FrsaStatus frsa_commit(struct FrsaNetwork *net, const struct FrsaAssignment *a);

/**
 * Frees the assignment's slots on every edge of its path, or on none.
 *
 * # Safety
 * `net` and `a` must be live handles.
 */
enum FrsaStatus frsa_release(struct FrsaNetwork *net, const struct FrsaAssignment *a);

/**
 * Fills `out` with the library defaults.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FrsaStatus frsa_sim_config_default(struct FrsaSimConfig *out);

/**
 * Simulates one replica on a copy of `net` and writes its metrics. The
 * network itself is left unchanged.
 *
 * # Safety
 * `net`, `config` and `out` must be valid pointers.
 */
enum FrsaStatus frsa_simulate(const struct FrsaNetwork *net,
                              const struct FrsaSimConfig *config,
                              struct FrsaMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLEXGRID_RSA_H */
