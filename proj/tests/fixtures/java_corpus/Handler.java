package org.example.api;

import java.io.InputStream;

public interface Handler extends AutoCloseable {
    int MAX_DEPTH = 64;

    String name();

    default boolean accepts(String contentType) {
        return contentType != null && contentType.startsWith("text/");
    }

    static Handler noop() {
        return () -> "noop";
    }

    void handle(InputStream in) throws java.io.IOException;

    @Override
    default void close() {
    }
}
