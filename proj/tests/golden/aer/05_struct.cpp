struct Point { int x; int y; };
int dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
