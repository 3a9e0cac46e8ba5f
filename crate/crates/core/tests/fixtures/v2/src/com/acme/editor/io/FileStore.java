package com.acme.editor.io;

import java.nio.file.Files;
import java.nio.file.Path;

public final class FileStore {
    private FileStore() {}

    public static String read(String path) {
        return TextCodec.decode(Files.readString(Path.of(path)));
    }

    public static void write(String text) {
        Files.writeString(Path.of("autosave.txt"), text);
    }
}
