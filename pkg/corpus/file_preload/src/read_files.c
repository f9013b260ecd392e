#include <stdio.h>

static int check(const char *path) {
    FILE *f = fopen(path, "r");
    if (!f) {
        fprintf(stderr, "cannot open %s\n", path);
        return 1;
    }
    fclose(f);
    printf("opened %s\n", path);
    return 0;
}

int main(void) {
    const char *TESTS[] = {"../resources/input/input.xml", "data/test.xml", 0};
    const char msg[] = "Stack overflow prevented.";
    int failures = 0;
    for (int i = 0; TESTS[i]; i++) {
        failures += check(TESTS[i]);
    }
    if (failures == 0) {
        printf("%s\n", msg);
    }
    return failures ? 1 : 0;
}
