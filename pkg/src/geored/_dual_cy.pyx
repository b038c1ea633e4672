# cython: language_level=3, boundscheck=False, cdivision=True
"""Compiled dual-number scalar, semantics identical to geored._dual_py.Dual.

Leaf duals (float components) take a pure-C arithmetic path; nested duals
fall back to dynamic dispatch on the component objects.
"""

from libc.math cimport pow as c_pow


cdef inline double _real_c(object x):
    while isinstance(x, Dual):
        x = (<Dual> x).a
    return <double> x


def _real(x):
    return _real_c(x)


cdef inline bint _leaf(Dual z):
    return (type(z.a) is float) and (type(z.b) is float)


cdef inline Dual _make(object a, object b):
    cdef Dual out = Dual.__new__(Dual)
    out.a = a
    out.b = b
    return out


cdef class Dual:
    cdef public object a
    cdef public object b

    def __init__(self, a, b=0.0):
        self.a = a
        self.b = b

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"

    def __add__(self, other):
        cdef Dual o
        if isinstance(other, Dual):
            o = <Dual> other
            if _leaf(self) and _leaf(o):
                return _make(
                    (<double> self.a) + (<double> o.a),
                    (<double> self.b) + (<double> o.b),
                )
            return _make(self.a + o.a, self.b + o.b)
        if _leaf(self) and type(other) is float:
            return _make((<double> self.a) + (<double> other), self.b)
        return _make(self.a + other, self.b)

    def __radd__(self, other):
        if _leaf(self) and type(other) is float:
            return _make((<double> other) + (<double> self.a), self.b)
        return _make(other + self.a, self.b)

    def __sub__(self, other):
        cdef Dual o
        if isinstance(other, Dual):
            o = <Dual> other
            if _leaf(self) and _leaf(o):
                return _make(
                    (<double> self.a) - (<double> o.a),
                    (<double> self.b) - (<double> o.b),
                )
            return _make(self.a - o.a, self.b - o.b)
        if _leaf(self) and type(other) is float:
            return _make((<double> self.a) - (<double> other), self.b)
        return _make(self.a - other, self.b)

    def __rsub__(self, other):
        if _leaf(self) and type(other) is float:
            return _make((<double> other) - (<double> self.a), -(<double> self.b))
        return _make(other - self.a, -self.b)

    def __mul__(self, other):
        cdef Dual o
        if isinstance(other, Dual):
            o = <Dual> other
            if _leaf(self) and _leaf(o):
                return _make(
                    (<double> self.a) * (<double> o.a),
                    (<double> self.a) * (<double> o.b)
                    + (<double> self.b) * (<double> o.a),
                )
            return _make(self.a * o.a, self.a * o.b + self.b * o.a)
        if _leaf(self) and type(other) is float:
            return _make(
                (<double> self.a) * (<double> other),
                (<double> self.b) * (<double> other),
            )
        return _make(self.a * other, self.b * other)

    def __rmul__(self, other):
        if _leaf(self) and type(other) is float:
            return _make(
                (<double> other) * (<double> self.a),
                (<double> other) * (<double> self.b),
            )
        return _make(other * self.a, other * self.b)

    def __truediv__(self, other):
        cdef Dual o
        cdef double q
        if isinstance(other, Dual):
            o = <Dual> other
            if _leaf(self) and _leaf(o):
                q = (<double> self.a) / (<double> o.a)
                return _make(
                    q, ((<double> self.b) - q * (<double> o.b)) / (<double> o.a)
                )
            qq = self.a / o.a
            return _make(qq, (self.b - qq * o.b) / o.a)
        if _leaf(self) and type(other) is float:
            return _make(
                (<double> self.a) / (<double> other),
                (<double> self.b) / (<double> other),
            )
        return _make(self.a / other, self.b / other)

    def __rtruediv__(self, other):
        cdef double q
        if _leaf(self) and type(other) is float:
            q = (<double> other) / (<double> self.a)
            return _make(q, -(q * (<double> self.b)) / (<double> self.a))
        qq = other / self.a
        return _make(qq, -(qq * self.b) / self.a)

    def __pow__(self, n, mod):
        if isinstance(n, Dual):
            raise TypeError("dual exponent not supported; use exp/log explicitly")
        cdef double av, nn
        if _leaf(self) and (type(n) is float or type(n) is int):
            av = <double> self.a
            nn = <double> n
            if nn == 2.0:
                return _make(av * av, 2.0 * av * (<double> self.b))
            return _make(
                c_pow(av, nn), (nn * c_pow(av, nn - 1.0)) * (<double> self.b)
            )
        if n == 2:
            return _make(self.a * self.a, 2.0 * (self.a * self.b))
        return _make(self.a**n, (n * self.a ** (n - 1)) * self.b)

    def __neg__(self):
        if _leaf(self):
            return _make(-(<double> self.a), -(<double> self.b))
        return _make(-self.a, -self.b)

    def __pos__(self):
        return self

    def __abs__(self):
        if _real_c(self.a) >= 0.0:
            return self
        return -self

    def __lt__(self, other):
        return _real_c(self) < _real_c(other)

    def __le__(self, other):
        return _real_c(self) <= _real_c(other)

    def __gt__(self, other):
        return _real_c(self) > _real_c(other)

    def __ge__(self, other):
        return _real_c(self) >= _real_c(other)

    def __float__(self):
        raise TypeError("refusing to silently drop the derivative part of a Dual")
