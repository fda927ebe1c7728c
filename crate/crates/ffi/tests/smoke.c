#include <stdio.h>
#include <string.h>
#include "proofscope.h"

int main(void) {
    PsCorpus *corpus = NULL;
    if (ps_corpus_bundled(&corpus) != PS_STATUS_OK) {
        fprintf(stderr, "%s\n", ps_last_error_message());
        return 1;
    }
    if (ps_corpus_entry_count(corpus) != 20) return 2;

    char *json = NULL;
    if (ps_cluster_terms(corpus, 5, 0, 10, &json) != PS_STATUS_OK) return 3;
    if (strstr(json, "\"k\": 4") == NULL) return 4;
    ps_string_free(json);

    char *dot = NULL;
    if (ps_depgraph_dot(corpus, "Missing.entry", &dot) != PS_STATUS_GRAPH_ERROR) return 5;
    if (strstr(ps_last_error_message(), "unknown root") == NULL) return 6;

    ps_corpus_free(corpus);
    puts("ok");
    return 0;
}
