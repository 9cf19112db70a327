#include "domino.h"

int summarize(const char *json) {
  DominoMachine *q = NULL;
  DominoMachine *quotient = NULL;
  size_t states = 0;
  bool sim = false;
  char *report = NULL;
  if (domino_machine_from_json(json, &q) != DOMINO_STATUS_OK) {
    return -1;
  }
  if (domino_build_quotient(q, 2, &quotient) == DOMINO_STATUS_OK) {
    domino_machine_num_states(quotient, &states);
    domino_simulates(q, quotient, DOMINO_EXTERNAL_OUTPUTS, &sim);
  }
  if (domino_report(q, DOMINO_EXTERNAL_OUTPUTS, 2, &report) == DOMINO_STATUS_OK) {
    domino_string_free(report);
  }
  domino_machine_free(quotient);
  domino_machine_free(q);
  return sim ? (int)states : -(int)(domino_last_error() != NULL);
}
