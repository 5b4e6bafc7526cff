package org.example.generic;

import java.util.List;
import java.util.Map;
import java.util.function.Supplier;

public class GenericMethods {
    public <T> T create(Class<T> type) throws ReflectiveOperationException {
        return type.getDeclaredConstructor().newInstance();
    }

    public <K, V extends List<? extends K>> Map<K, V> index(Map<K, V> in) {
        return in;
    }

    public <T> T orElse(Supplier<? extends T> supplier, T fallback) {
        T v = supplier.get();
        return v == null ? fallback : v;
    }
}
