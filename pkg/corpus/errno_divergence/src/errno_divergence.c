#include <errno.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    FILE *f = fopen("/a/file/that/does/not/exist.txt", "r");
    if (f) {
        fclose(f);
        fprintf(stderr, "unexpectedly opened the file\n");
        return 1;
    }
    printf("This is plog: %s [%d]\n", strerror(errno), errno);
    if (errno != 2) {
        fprintf(stderr, "expected errno 2 for a missing file, got %d\n", errno);
        return 1;
    }
    return 0;
}
