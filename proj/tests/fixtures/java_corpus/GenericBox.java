package org.example.collections;

import java.util.Iterator;
import java.util.ArrayList;

public class GenericBox<T extends Comparable<? super T>>
        extends AbstractBox<T>
        implements Iterable<T>, java.io.Serializable {
    private static final long serialVersionUID = 1L;
    private final ArrayList<T> items = new ArrayList<>();

    public GenericBox() {
    }

    @SafeVarargs
    public GenericBox(T... initial) {
        for (T t : initial) items.add(t);
    }

    public <R extends T> void addAll(Iterable<R> more) {
        for (R r : more) items.add(r);
    }

    public T max() {
        T best = null;
        for (T t : items) {
            if (best == null || t.compareTo(best) > 0) best = t;
        }
        return best;
    }

    @Override
    public Iterator<T> iterator() {
        return items.iterator();
    }
}
