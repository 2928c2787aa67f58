#include <stdio.h>
#include <string.h>
#include "hoamp.h"

int main(void) {
    HoampFactorReport *rep = NULL;
    if (hoamp_factor(35, 7, 2.0, 30, 0.99, &rep) != HOAMP_STATUS_OK) {
        fprintf(stderr, "%s\n", hoamp_last_error());
        return 1;
    }
    uint64_t r = 0, s = 0;
    HoampStatus st = hoamp_factor_report_factors(rep, &r, &s);
    HoampRecord rec;
    hoamp_factor_report_record(rep, 0, &rec);
    printf("%llu x %llu status %d iterations %llu pr1 %.6f\n", (unsigned long long)r, (unsigned long long)s, (int)st,
           (unsigned long long)hoamp_factor_report_len(rep), rec.pr_e);
    char *json = NULL;
    hoamp_factor_report_json(rep, &json);
    int has_seed = json != NULL && strstr(json, "\"seed\":7") != NULL;
    hoamp_string_free(json);
    hoamp_factor_report_free(rep);

    rep = NULL;
    st = hoamp_factor(13, 0, 2.0, 30, 0.99, &rep);
    printf("prime status %d error %s\n", (int)st, hoamp_last_error());
    printf("seed %d version %s\n", has_seed, hoamp_version());
    return rep == NULL ? 0 : 1;
}
