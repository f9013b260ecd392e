int helloWorld();

int main() {
    helloWorld();
    return 0;
}
