#include <dirent.h>
#include <stdio.h>
#include <string.h>

int main(void) {
    struct dirent *entry;
    DIR *dir = opendir("./data");
    if (!dir) {
        printf("dir is null\n");
        return 1;
    }
    int found = 0;
    while ((entry = readdir(dir)) != NULL) {
        if (!strcmp(entry->d_name, ".") || !strcmp(entry->d_name, "..")) {
            continue;
        }
        printf("entry: %s\n", entry->d_name);
        if (!strcmp(entry->d_name, "emp")) {
            found = 1;
        }
    }
    closedir(dir);
    if (!found) {
        fprintf(stderr, "empty directory 'emp' missing from preloaded tree\n");
        return 1;
    }
    return 0;
}
