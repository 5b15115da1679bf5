#include <stdio.h>
#include <string.h>

#include "flexgrid_rsa.h"

#define CHECK(cond)                                              \
  do {                                                           \
    if (!(cond)) {                                               \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
      return 1;                                                  \
    }                                                            \
  } while (0)

int main(void) {
  const char *topo = "nodes 3\n0 1 10 50\n1 2 10 50\n0 2 30 50\n";
  FrsaNetwork *net = NULL;
  CHECK(frsa_network_from_str(topo, 12.5, &net) == FRSA_STATUS_OK);

  size_t nodes = 0, edges = 0, slots = 0;
  CHECK(frsa_network_dimensions(net, &nodes, &edges, &slots) == FRSA_STATUS_OK);
  CHECK(nodes == 3 && edges == 3 && slots == 4);

  FrsaAssignment *a = NULL;
  CHECK(frsa_route(net, FRSA_POLICY_TYPE3, 0, 2, 2, 10, &a) == FRSA_STATUS_OK);
  size_t path[4], count = 0;
  CHECK(frsa_assignment_path(a, path, 4, &count) == FRSA_STATUS_OK);
  CHECK(count == 3 && path[1] == 1);
  CHECK(frsa_commit(net, a) == FRSA_STATUS_OK);

  char bits[8];
  size_t needed = 0;
  CHECK(frsa_network_edge_bitmap(net, 0, bits, sizeof bits, &needed) == FRSA_STATUS_OK);
  CHECK(strcmp(bits, "0011") == 0);

  CHECK(frsa_commit(net, a) == FRSA_STATUS_SPECTRUM);
  CHECK(frsa_last_error_message() != NULL);
  CHECK(frsa_release(net, a) == FRSA_STATUS_OK);
  frsa_assignment_free(a);

  FrsaSimConfig cfg;
  CHECK(frsa_sim_config_default(&cfg) == FRSA_STATUS_OK);
  cfg.total_requests = 500;
  cfg.demand_max_gbps = 25.0;
  FrsaMetrics m;
  CHECK(frsa_simulate(net, &cfg, &m) == FRSA_STATUS_OK);
  CHECK(m.blocking_probability >= 0.0 && m.blocking_probability <= 1.0);

  frsa_network_free(net);
  puts("ok");
  return 0;
}
