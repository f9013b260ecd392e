#include <stdio.h>
#include <string.h>

/* Each frame holds a 2 KiB buffer the optimizer cannot drop: 200 frames
 * need ~400 KiB of stack, past the 64 KiB wasm default but inside the
 * 1 MiB policy (and the 8 MiB native default). */
static int descend(int depth, volatile char *parent) {
    volatile char frame[2048];
    memset((char *)frame, depth & 0xff, sizeof(frame));
    frame[0] = parent[0] + 1;
    if (depth == 0) {
        return frame[0] & 1;
    }
    return descend(depth - 1, frame) + (frame[42] ? 0 : 1);
}

int main(void) {
    volatile char seed[1] = {0};
    int result = descend(200, seed);
    printf("descended with result %d\n", result);
    return result == 1 ? 0 : 1;
}
