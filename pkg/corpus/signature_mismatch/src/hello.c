#include <stdio.h>

/* Inconsistent with the declaration the caller sees. */
void helloWorld() {
    printf("hello world!\n");
}
