const char *name = "forge";
char c = 'x';
bool ok = true;
int *none = nullptr;
