/* Prints each segment of a trace analysis.
 *
 *   cargo build -p mostwork-ffi
 *   cc -Icrates/ffi/include crates/ffi/examples/analyze.c \
 *      target/debug/libmostwork_ffi.a -lpthread -ldl -lm -o analyze
 *   ./analyze crates/core/fixtures/lifting/lifting.trace
 */
#include <stdio.h>
#include <stdlib.h>

#include "mostwork.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    rewind(f);
    char *buf = malloc((size_t)n + 1);
    if (buf && fread(buf, 1, (size_t)n, f) != (size_t)n) {
        free(buf);
        buf = NULL;
    }
    if (buf) buf[n] = '\0';
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s TRACE [GESTURES COLLISIONS]\n", argv[0]);
        return 1;
    }
    char *trace = slurp(argv[1]);
    char *gestures = argc > 3 ? slurp(argv[2]) : NULL;
    char *collisions = argc > 3 ? slurp(argv[3]) : NULL;
    if (!trace) {
        fprintf(stderr, "cannot read %s\n", argv[1]);
        return 2;
    }

    MwAnalyzer *analyzer = mw_analyzer_new();
    MwReport *report = NULL;
    MwStatus status = mw_analyze(analyzer, trace, gestures, collisions, &report);
    if (status != MW_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", (int)status, mw_last_error());
        mw_analyzer_free(analyzer);
        return 2;
    }

    for (size_t i = 0; i < mw_report_segment_count(report); i++) {
        MwSegment seg;
        char *code = NULL;
        mw_report_segment(report, i, &seg);
        mw_report_segment_code(report, i, &code);
        printf("%-10s %4llu-%-4llu %5.2f s %5.2f s %5.1f%%\n", code, (unsigned long long)seg.start_frame,
               (unsigned long long)seg.end_frame, seg.standard_time, seg.actual_time, seg.efficiency * 100.0);
        mw_string_free(code);
    }
    MwTotals totals;
    mw_report_totals(report, &totals);
    printf("total      %9s %5.2f s %5.2f s %5.1f%%\n", "", totals.standard_time, totals.actual_time,
           totals.efficiency * 100.0);

    mw_report_free(report);
    mw_analyzer_free(analyzer);
    free(trace);
    free(gestures);
    free(collisions);
    return 0;
}
